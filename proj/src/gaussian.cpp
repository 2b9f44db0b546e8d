#include "zsar/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "zsar/errors.hpp"
#include "zsar/rng.hpp"

namespace zsar {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Vector floored(Vector variance, double floor) {
    return variance.cwiseMax(floor);
}

}  // namespace

ClassGaussian::ClassGaussian(Vector mean, Vector log_var, double variance_floor)
    : mean_(std::move(mean)), log_var_(std::move(log_var)) {
    if (mean_.size() != log_var_.size()) {
        throw DimensionError("ClassGaussian: mean has " + std::to_string(mean_.size()) +
                             " dims, log_var has " + std::to_string(log_var_.size()));
    }
    if (!mean_.allFinite() || !log_var_.allFinite()) {
        throw NumericalError("ClassGaussian: non-finite parameters");
    }
    log_var_ = log_var_.cwiseMax(std::log(variance_floor));
}

ClassGaussian ClassGaussian::from_variance(Vector mean, const Vector& variance, double variance_floor) {
    return ClassGaussian(std::move(mean), floored(variance, variance_floor).array().log().matrix(),
                         variance_floor);
}

ClassGaussian fit_mle(const Matrix& examples, double variance_floor) {
    if (examples.rows() == 0) {
        throw DataValidationError("fit_mle: empty class (no examples)");
    }
    const double n = static_cast<double>(examples.rows());
    Vector mean = examples.colwise().sum().transpose() / n;
    Vector var = (examples.rowwise() - mean.transpose()).array().square().colwise().sum().transpose() / n;
    return ClassGaussian::from_variance(std::move(mean), var, variance_floor);
}

double log_density(const Eigen::Ref<const Vector>& x, const ClassGaussian& g) {
    if (x.size() != g.dim()) {
        throw DimensionError("log_density: x has " + std::to_string(x.size()) + " dims, gaussian has " +
                             std::to_string(g.dim()));
    }
    const auto& lv = g.log_var().array();
    const auto diff2 = (x - g.mean()).array().square();
    return (-kHalfLog2Pi - 0.5 * lv - 0.5 * diff2 * (-lv).exp()).sum();
}

Vector log_density_rows(const Matrix& xs, const ClassGaussian& g) {
    if (xs.cols() != g.dim()) {
        throw DimensionError("log_density_rows: feature dimension mismatch");
    }
    const Eigen::RowVectorXd precision = (-g.log_var().array()).exp().matrix().transpose();
    const double constant = -kHalfLog2Pi * static_cast<double>(g.dim()) - 0.5 * g.log_var().sum();
    Vector out(xs.rows());
    for (Eigen::Index n = 0; n < xs.rows(); ++n) {
        const double quad = ((xs.row(n) - g.mean().transpose()).array().square() * precision.array()).sum();
        out(n) = constant - 0.5 * quad;
    }
    return out;
}

Matrix sample(const ClassGaussian& g, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const Vector stddev = (0.5 * g.log_var().array()).exp();
    Matrix out(static_cast<Eigen::Index>(n), g.dim());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index d = 0; d < out.cols(); ++d) {
            out(i, d) = g.mean()(d) + stddev(d) * rng.normal();
        }
    }
    return out;
}

ClassGaussian few_shot_update(const ClassGaussian& prior, const Matrix& new_examples, double variance_floor) {
    if (new_examples.rows() == 0) {
        throw DataValidationError("few_shot_update: no examples given");
    }
    if (new_examples.cols() != prior.dim()) {
        throw DimensionError("few_shot_update: feature dimension mismatch");
    }
    const double n = static_cast<double>(new_examples.rows());
    Vector mean = (prior.mean() + new_examples.colwise().sum().transpose()) / (1.0 + n);

    const Vector empirical =
        (new_examples.rowwise() - prior.mean().transpose()).array().square().colwise().sum().transpose() / n;
    const Vector empirical_floored = floored(empirical, variance_floor);
    const Vector posterior =
        (prior.variance().array().inverse() + n * empirical_floored.array().inverse()).inverse();
    return ClassGaussian::from_variance(std::move(mean), posterior, variance_floor);
}

}  // namespace zsar
