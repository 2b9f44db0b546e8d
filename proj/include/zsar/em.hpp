#pragma once

#include <span>
#include <vector>

#include "zsar/gaussian.hpp"

namespace zsar {

struct EmConfig {
    int max_iters = 100;
    double rel_tol = 1e-6;
    double variance_floor = kVarianceFloor;

    void validate() const;
};

struct EmResult {
    std::vector<ClassGaussian> gaussians;
    Matrix responsibilities;              // N_u x U, rows sum to 1
    std::vector<double> log_likelihoods;  // [0] at the initial parameters, then one per iteration
    int iterations_run = 0;
};

/// Σ_n log( (1/U) Σ_c N(x_n | g_c) ), evaluated with log-sum-exp.
double gmm_log_likelihood(const Matrix& unlabeled, std::span<const ClassGaussian> gaussians);

/// Posterior class probabilities under uniform mixing weights.
Matrix responsibilities(const Matrix& unlabeled, std::span<const ClassGaussian> gaussians);

/// Refines `init` on unlabeled data with a diagonal GMM whose mixing weights
/// stay fixed at 1/U. Means and variances are re-estimated each M-step
/// (variances floored). A component whose total responsibility drops below
/// 1e-8 keeps its previous parameters for that iteration.
///
/// Stops when |ΔLL| / (1 + |LL|) < rel_tol or after max_iters iterations.
EmResult em_refine(const Matrix& unlabeled, std::span<const ClassGaussian> init, const EmConfig& cfg = {});

}  // namespace zsar
