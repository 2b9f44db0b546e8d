#pragma once

#include <cstdint>

#include "zsar/linalg.hpp"

namespace zsar {

// Applied after every variance estimate (feature-space units squared).
inline constexpr double kVarianceFloor = 1e-6;
// Upper clamp on predicted log-variances, keeps exp() finite.
inline constexpr double kMaxLogVar = 50.0;

/// Diagonal Gaussian over the visual feature space, stored as mean and
/// per-dimension log-variance.
class ClassGaussian {
public:
    ClassGaussian() = default;

    /// Throws DimensionError on a size mismatch and NumericalError on
    /// non-finite input. Log-variances below ln(variance_floor) are raised to it.
    ClassGaussian(Vector mean, Vector log_var, double variance_floor = kVarianceFloor);

    static ClassGaussian from_variance(Vector mean, const Vector& variance,
                                       double variance_floor = kVarianceFloor);

    const Vector& mean() const { return mean_; }
    const Vector& log_var() const { return log_var_; }
    Vector variance() const { return log_var_.array().exp(); }
    Eigen::Index dim() const { return mean_.size(); }

private:
    Vector mean_;
    Vector log_var_;
};

/// Maximum-likelihood fit (biased variance, divide by N) to the rows of `examples`.
ClassGaussian fit_mle(const Matrix& examples, double variance_floor = kVarianceFloor);

double log_density(const Eigen::Ref<const Vector>& x, const ClassGaussian& g);

/// Log-density of every row of `xs`.
Vector log_density_rows(const Matrix& xs, const ClassGaussian& g);

/// n i.i.d. rows drawn with a seeded mt19937_64 + Box-Muller stream.
Matrix sample(const ClassGaussian& g, std::size_t n, std::uint64_t seed);

/// Conjugate update of a zero-shot prior with a handful of labeled examples.
///
///   mean' = (mean + sum x_n) / (1 + N)
///   var*  = (1/N) sum (x_n - mean)^2      (deviation from the PRIOR mean)
///   var'  = (1/var + N/var*)^-1
///
/// Both var* and var' are floored. var' is the posterior variance of the mean
/// and shrinks like var*/N, so classes updated with many shots become sharply
/// peaked.
ClassGaussian few_shot_update(const ClassGaussian& prior, const Matrix& new_examples,
                              double variance_floor = kVarianceFloor);

}  // namespace zsar
