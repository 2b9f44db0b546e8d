#include "zsar/em.hpp"

#include <cmath>
#include <limits>

#include "zsar/errors.hpp"

namespace zsar {

namespace {

constexpr double kCollapseMass = 1e-8;

// N x U matrix of per-component log densities.
Matrix component_log_densities(const Matrix& xs, std::span<const ClassGaussian> gaussians) {
    Matrix out(xs.rows(), static_cast<Eigen::Index>(gaussians.size()));
    for (std::size_t c = 0; c < gaussians.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = log_density_rows(xs, gaussians[c]);
    }
    return out;
}

double row_log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    const double peak = row.maxCoeff();
    if (!std::isfinite(peak)) return peak;
    return peak + std::log((row.array() - peak).exp().sum());
}

void check_inputs(const Matrix& xs, std::span<const ClassGaussian> gaussians) {
    if (gaussians.empty()) {
        throw ConfigError("mixture needs at least one component");
    }
    for (const auto& g : gaussians) {
        if (g.dim() != xs.cols()) throw DimensionError("mixture component dimension mismatch");
    }
}

}  // namespace

void EmConfig::validate() const {
    if (max_iters < 1) throw ConfigError("em max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw ConfigError("em rel_tol must be positive");
    if (!(variance_floor > 0.0)) throw ConfigError("em variance_floor must be positive");
}

double gmm_log_likelihood(const Matrix& unlabeled, std::span<const ClassGaussian> gaussians) {
    check_inputs(unlabeled, gaussians);
    const Matrix logp = component_log_densities(unlabeled, gaussians);
    const double log_weight = -std::log(static_cast<double>(gaussians.size()));
    double total = 0.0;
    for (Eigen::Index n = 0; n < logp.rows(); ++n) {
        total += log_weight + row_log_sum_exp(logp.row(n));
    }
    return total;
}

Matrix responsibilities(const Matrix& unlabeled, std::span<const ClassGaussian> gaussians) {
    check_inputs(unlabeled, gaussians);
    // The uniform weight 1/U cancels in the normalization.
    Matrix resp = component_log_densities(unlabeled, gaussians);
    for (Eigen::Index n = 0; n < resp.rows(); ++n) {
        const double lse = row_log_sum_exp(resp.row(n));
        resp.row(n) = (resp.row(n).array() - lse).exp();
        resp.row(n) /= resp.row(n).sum();
    }
    return resp;
}

EmResult em_refine(const Matrix& unlabeled, std::span<const ClassGaussian> init, const EmConfig& cfg) {
    cfg.validate();
    check_inputs(unlabeled, init);
    if (unlabeled.rows() < static_cast<Eigen::Index>(init.size())) {
        throw DataValidationError("em_refine: fewer unlabeled points (" + std::to_string(unlabeled.rows()) +
                                  ") than components (" + std::to_string(init.size()) + ")");
    }

    EmResult result;
    result.gaussians.assign(init.begin(), init.end());
    double previous = gmm_log_likelihood(unlabeled, result.gaussians);
    result.log_likelihoods.push_back(previous);

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const Matrix resp = responsibilities(unlabeled, result.gaussians);
        for (Eigen::Index c = 0; c < resp.cols(); ++c) {
            const double mass = resp.col(c).sum();
            if (mass < kCollapseMass) {
                continue;  // collapsed: keep the current estimate
            }
            Vector mean = (unlabeled.transpose() * resp.col(c)) / mass;
            Vector var = Vector::Zero(unlabeled.cols());
            for (Eigen::Index n = 0; n < unlabeled.rows(); ++n) {
                var += resp(n, c) * (unlabeled.row(n).transpose() - mean).array().square().matrix();
            }
            var /= mass;
            result.gaussians[static_cast<std::size_t>(c)] =
                ClassGaussian::from_variance(std::move(mean), var, cfg.variance_floor);
        }
        ++result.iterations_run;

        const double current = gmm_log_likelihood(unlabeled, result.gaussians);
        result.log_likelihoods.push_back(current);
        if (!std::isfinite(current)) {
            throw NumericalError("em_refine: log-likelihood became non-finite");
        }
        const bool converged = std::abs(current - previous) / (1.0 + std::abs(previous)) < cfg.rel_tol;
        previous = current;
        if (converged) break;
    }
    result.responsibilities = responsibilities(unlabeled, result.gaussians);
    return result;
}

}  // namespace zsar
