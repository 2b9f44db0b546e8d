#pragma once

#include <span>
#include <vector>

#include "zsar/gaussian.hpp"
#include "zsar/linalg.hpp"

namespace zsar {

struct HyperParams {
    double lambda_mu = 1e-3;     // ridge penalty, mean map
    double lambda_1 = 1e-4;      // reconstruction weight, mean map
    double lambda_sigma = 1e-1;  // ridge penalty, log-variance map
    double lambda_2 = 1e-4;      // reconstruction weight, log-variance map

    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

// What a class attribute vector is turned into before the weight maps are
// applied: kernel similarities to the seen classes, or the raw attributes.
enum class MapBasis { Kernel, Attributes };

/// Learned maps from class attributes to Gaussian parameters.
///
/// With basis Kernel the weights are D x S and a query attribute a is lifted
/// to k = [k(a, a_1), ..., k(a, a_S)]. With basis Attributes the weights are
/// D x K and act on a directly.
struct ParamMap {
    Matrix w_mu;
    Matrix w_sigma;
    Matrix seen_attrs;
    KernelSpec kernel;
    HyperParams hyper;
    MapBasis basis = MapBasis::Kernel;

    /// Columns are the regression inputs for each row of `attrs`.
    Matrix inputs_for(const Matrix& attrs) const;

    void validate() const;
};

/// Minimizer of ||T - W X||^2 + lambda ||W||^2 + lambda_rec ||X - W^T T||^2.
///
/// Setting the gradient to zero gives the Sylvester equation
///   (lambda_rec T T^T) W + W (X X^T + lambda I) = (1 + lambda_rec) T X^T
/// which is solved with solve_sylvester. T is D x S, X is P x S.
Matrix solve_reconstructive_map(const Matrix& targets, const Matrix& inputs, double lambda, double lambda_rec);

/// Relative residual of the stationarity equation above at `w`.
double stationarity_residual(const Matrix& w, const Matrix& targets, const Matrix& inputs, double lambda,
                             double lambda_rec);

/// Stacks the class means (M) and log-variances (R) as D x S columns.
Matrix means_matrix(std::span<const ClassGaussian> gaussians);
Matrix log_var_matrix(std::span<const ClassGaussian> gaussians);

/// Kernel regression from seen-class attributes to mean and log-variance.
ParamMap fit_param_map(std::span<const ClassGaussian> seen, const Matrix& seen_attrs, const KernelSpec& kernel,
                       const HyperParams& hyper);

/// Same objective with the raw attribute matrix in place of the kernel matrix.
ParamMap fit_param_map_linear(std::span<const ClassGaussian> seen, const Matrix& seen_attrs,
                              const HyperParams& hyper);

struct FitResiduals {
    double mean_map = 0.0;
    double log_var_map = 0.0;
};

FitResiduals stationarity_residuals(const ParamMap& map, std::span<const ClassGaussian> seen);

/// mean = W_mu k_c, variance = exp(W_sigma k_c) with log-variance clamped to
/// [ln(variance_floor), 50].
std::vector<ClassGaussian> predict_unseen(const ParamMap& map, const Matrix& unseen_attrs);

}  // namespace zsar
