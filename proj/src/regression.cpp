#include "zsar/regression.hpp"

#include <cmath>

#include "zsar/errors.hpp"

namespace zsar {

namespace {

void check_seen(std::span<const ClassGaussian> seen, const Matrix& seen_attrs) {
    if (seen.size() < 2) {
        throw DataValidationError("fit_param_map: need at least two seen classes, got " +
                                  std::to_string(seen.size()));
    }
    if (static_cast<Eigen::Index>(seen.size()) != seen_attrs.rows()) {
        throw DimensionError("fit_param_map: " + std::to_string(seen.size()) + " gaussians but " +
                             std::to_string(seen_attrs.rows()) + " attribute rows");
    }
    const Eigen::Index d = seen.front().dim();
    for (const auto& g : seen) {
        if (g.dim() != d) throw DimensionError("fit_param_map: seen gaussians differ in dimension");
    }
}

Matrix stack_columns(std::span<const ClassGaussian> gaussians, bool log_var) {
    if (gaussians.empty()) return {};
    Matrix out(gaussians.front().dim(), static_cast<Eigen::Index>(gaussians.size()));
    for (std::size_t c = 0; c < gaussians.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = log_var ? gaussians[c].log_var() : gaussians[c].mean();
    }
    return out;
}

ParamMap fit_with_inputs(std::span<const ClassGaussian> seen, const Matrix& seen_attrs, const Matrix& inputs,
                         const KernelSpec& kernel, const HyperParams& hyper, MapBasis basis) {
    const Matrix m = means_matrix(seen);
    const Matrix r = log_var_matrix(seen);
    ParamMap map;
    map.w_mu = solve_reconstructive_map(m, inputs, hyper.lambda_mu, hyper.lambda_1);
    map.w_sigma = solve_reconstructive_map(r, inputs, hyper.lambda_sigma, hyper.lambda_2);
    map.seen_attrs = seen_attrs;
    map.kernel = kernel;
    map.hyper = hyper;
    map.basis = basis;
    return map;
}

}  // namespace

void HyperParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(lambda_mu > 0.0) || !(lambda_sigma > 0.0) || !finite(lambda_mu) || !finite(lambda_sigma)) {
        throw ConfigError("lambda_mu and lambda_sigma must be positive and finite");
    }
    if (!(lambda_1 >= 0.0) || !(lambda_2 >= 0.0) || !finite(lambda_1) || !finite(lambda_2)) {
        throw ConfigError("lambda_1 and lambda_2 must be nonnegative and finite");
    }
}

Matrix ParamMap::inputs_for(const Matrix& attrs) const {
    if (attrs.cols() != seen_attrs.cols()) {
        throw DimensionError("attribute dimension " + std::to_string(attrs.cols()) + " does not match map (" +
                             std::to_string(seen_attrs.cols()) + ")");
    }
    if (basis == MapBasis::Attributes) {
        return attrs.transpose();
    }
    return kernel_matrix(seen_attrs, attrs, kernel);
}

void ParamMap::validate() const {
    if (w_mu.rows() != w_sigma.rows() || w_mu.cols() != w_sigma.cols()) {
        throw DimensionError("ParamMap: w_mu and w_sigma shapes differ");
    }
    const Eigen::Index expected = basis == MapBasis::Kernel ? seen_attrs.rows() : seen_attrs.cols();
    if (w_mu.cols() != expected) {
        throw DimensionError("ParamMap: weight column count does not match the seen attributes");
    }
    kernel.validate();
    hyper.validate();
}

Matrix solve_reconstructive_map(const Matrix& targets, const Matrix& inputs, double lambda, double lambda_rec) {
    if (targets.cols() != inputs.cols()) {
        throw DimensionError("solve_reconstructive_map: targets and inputs disagree on class count");
    }
    Matrix b = inputs * inputs.transpose();
    b.diagonal().array() += lambda;
    const Matrix c = (1.0 + lambda_rec) * (targets * inputs.transpose());
    if (targets.rows() <= targets.cols()) {
        const Matrix a = lambda_rec * (targets * targets.transpose());
        return solve_sylvester(a, b, c);
    }

    // D > S: T T^T has rank <= S. With T = U diag(s) V^T (thin), the equation
    // splits into an S-dimensional Sylvester problem on range(U) and
    // W_perp B = C_perp on the complement, where the left operand vanishes.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(targets), Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index rank = 0;
    const double cutoff = s.size() > 0 ? 1e-12 * s(0) : 0.0;
    while (rank < s.size() && s(rank) > cutoff) ++rank;
    const Matrix u = svd.matrixU().leftCols(rank);

    const Matrix projected = u.transpose() * c;
    Matrix w = Matrix::Zero(c.rows(), c.cols());
    if (rank > 0) {
        const Matrix a_small = (lambda_rec * s.head(rank).array().square()).matrix().asDiagonal();
        w = u * solve_sylvester(a_small, b, projected);
    }
    const Matrix c_perp = c - u * projected;
    Eigen::LDLT<Eigen::MatrixXd> ldlt{Eigen::MatrixXd(b)};
    w += Matrix(ldlt.solve(Eigen::MatrixXd(c_perp.transpose())).transpose());
    if (!w.allFinite()) {
        throw NumericalError("solve_reconstructive_map: non-finite solution");
    }
    return w;
}

double stationarity_residual(const Matrix& w, const Matrix& targets, const Matrix& inputs, double lambda,
                             double lambda_rec) {
    const Matrix c = (1.0 + lambda_rec) * (targets * inputs.transpose());
    const Matrix lhs = lambda_rec * (targets * targets.transpose()) * w +
                       w * (inputs * inputs.transpose()) + lambda * w;
    return (lhs - c).norm() / (1.0 + c.norm());
}

Matrix means_matrix(std::span<const ClassGaussian> gaussians) {
    return stack_columns(gaussians, false);
}

Matrix log_var_matrix(std::span<const ClassGaussian> gaussians) {
    return stack_columns(gaussians, true);
}

ParamMap fit_param_map(std::span<const ClassGaussian> seen, const Matrix& seen_attrs, const KernelSpec& kernel,
                       const HyperParams& hyper) {
    hyper.validate();
    kernel.validate();
    check_seen(seen, seen_attrs);
    const Matrix k = kernel_matrix(seen_attrs, seen_attrs, kernel);
    return fit_with_inputs(seen, seen_attrs, k, kernel, hyper, MapBasis::Kernel);
}

ParamMap fit_param_map_linear(std::span<const ClassGaussian> seen, const Matrix& seen_attrs,
                              const HyperParams& hyper) {
    hyper.validate();
    check_seen(seen, seen_attrs);
    return fit_with_inputs(seen, seen_attrs, seen_attrs.transpose(), KernelSpec::linear(), hyper,
                           MapBasis::Attributes);
}

FitResiduals stationarity_residuals(const ParamMap& map, std::span<const ClassGaussian> seen) {
    const Matrix inputs = map.inputs_for(map.seen_attrs);
    return {stationarity_residual(map.w_mu, means_matrix(seen), inputs, map.hyper.lambda_mu, map.hyper.lambda_1),
            stationarity_residual(map.w_sigma, log_var_matrix(seen), inputs, map.hyper.lambda_sigma,
                                  map.hyper.lambda_2)};
}

std::vector<ClassGaussian> predict_unseen(const ParamMap& map, const Matrix& unseen_attrs) {
    const Matrix inputs = map.inputs_for(unseen_attrs);
    const Matrix means = map.w_mu * inputs;
    const Matrix log_vars = (map.w_sigma * inputs).cwiseMin(kMaxLogVar);
    std::vector<ClassGaussian> out;
    out.reserve(static_cast<std::size_t>(unseen_attrs.rows()));
    for (Eigen::Index c = 0; c < unseen_attrs.rows(); ++c) {
        out.emplace_back(means.col(c), log_vars.col(c));
    }
    return out;
}

}  // namespace zsar
