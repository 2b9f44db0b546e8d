#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "zsar/em.hpp"
#include "zsar/errors.hpp"

using namespace zsar;
using testing::random_matrix;
using testing::random_vector;

namespace {

Matrix two_clusters(std::uint64_t seed) {
    Vector plus = Vector::Constant(2, 5.0), minus = Vector::Constant(2, -5.0);
    Matrix x(400, 2);
    x.topRows(200) = sample(ClassGaussian(plus, Vector::Zero(2)), 200, seed);
    x.bottomRows(200) = sample(ClassGaussian(minus, Vector::Zero(2)), 200, seed + 1);
    return x;
}

std::vector<ClassGaussian> random_components(Rng& rng, int u, int d) {
    std::vector<ClassGaussian> out;
    for (int c = 0; c < u; ++c) out.emplace_back(random_vector(rng, d, 3.0), random_vector(rng, d, 0.5));
    return out;
}

// Mixture data: one block of rows per component.
Matrix mixture_sample(const std::vector<ClassGaussian>& comps, int per_component, std::uint64_t seed) {
    Matrix x(static_cast<Eigen::Index>(comps.size()) * per_component, comps.front().dim());
    for (std::size_t c = 0; c < comps.size(); ++c) {
        x.middleRows(static_cast<Eigen::Index>(c) * per_component, per_component) =
            sample(comps[c], static_cast<std::size_t>(per_component), seed + c);
    }
    return x;
}

}  // namespace

TEST_SUITE("em_refine") {
    TEST_CASE("one component lands on the MLE of all data after one M-step") {
        Rng rng(1);
        const Matrix x = random_matrix(rng, 50, 3, 2.0);
        const std::vector<ClassGaussian> init{ClassGaussian(Vector::Zero(3), Vector::Zero(3))};
        const auto res = em_refine(x, init);
        const auto mle = fit_mle(x);
        CHECK((res.gaussians[0].mean() - mle.mean()).norm() < 1e-12);
        CHECK((res.gaussians[0].log_var() - mle.log_var()).norm() < 1e-12);
        EmConfig one;
        one.max_iters = 1;
        const auto single = em_refine(x, init, one);
        CHECK(single.iterations_run == 1);
        CHECK((single.gaussians[0].mean() - mle.mean()).norm() < 1e-12);
    }

    TEST_CASE("two clusters at +-5 from an initialization at +-4") {
        const Matrix x = two_clusters(3);
        const std::vector<ClassGaussian> init{ClassGaussian(Vector::Constant(2, 4.0), Vector::Zero(2)),
                                              ClassGaussian(Vector::Constant(2, -4.0), Vector::Zero(2))};
        const auto res = em_refine(x, init);
        CHECK((res.gaussians[0].mean() - Vector::Constant(2, 5.0)).cwiseAbs().maxCoeff() <= 0.1);
        CHECK((res.gaussians[1].mean() - Vector::Constant(2, -5.0)).cwiseAbs().maxCoeff() <= 0.1);
    }

    TEST_CASE("log_likelihoods starts at the initial parameters") {
        const Matrix x = two_clusters(5);
        const std::vector<ClassGaussian> init{ClassGaussian(Vector::Constant(2, 1.0), Vector::Zero(2)),
                                              ClassGaussian(Vector::Constant(2, -1.0), Vector::Zero(2))};
        const auto res = em_refine(x, init);
        CHECK(res.log_likelihoods.front() == gmm_log_likelihood(x, init));
        CHECK(res.log_likelihoods.size() == static_cast<std::size_t>(res.iterations_run) + 1);
        CHECK(res.log_likelihoods.back() == doctest::Approx(gmm_log_likelihood(x, res.gaussians)).epsilon(1e-14));
    }

    TEST_CASE("property: log-likelihood never decreases and responsibilities are normalized") {
        Rng rng(7);
        for (int trial = 0; trial < 25; ++trial) {
            const int u = testing::uniform_int(rng, 1, 5);
            const int d = testing::uniform_int(rng, 1, 6);
            const auto truth = random_components(rng, u, d);
            const Matrix x = mixture_sample(truth, testing::uniform_int(rng, 5, 60), 100 + trial);
            const auto init = random_components(rng, u, d);
            EmConfig cfg;
            cfg.max_iters = 60;
            cfg.rel_tol = 1e-12;
            const auto res = em_refine(x, init, cfg);
            for (std::size_t i = 1; i < res.log_likelihoods.size(); ++i) {
                CHECK(res.log_likelihoods[i] >= res.log_likelihoods[i - 1] - 1e-9);
            }
            CHECK(res.responsibilities.rows() == x.rows());
            CHECK(res.responsibilities.minCoeff() >= 0.0);
            CHECK(res.responsibilities.maxCoeff() <= 1.0);
            for (Eigen::Index n = 0; n < x.rows(); ++n) {
                CHECK(std::abs(res.responsibilities.row(n).sum() - 1.0) <= 1e-9);
            }
            for (const auto& g : res.gaussians) CHECK(g.variance().minCoeff() >= kVarianceFloor * (1 - 1e-12));
        }
    }

    TEST_CASE("property: a converged result is a fixed point") {
        Rng rng(8);
        for (int trial = 0; trial < 10; ++trial) {
            const int u = testing::uniform_int(rng, 1, 4);
            const auto truth = random_components(rng, u, 3);
            const Matrix x = mixture_sample(truth, 80, 300 + trial);
            EmConfig tight;
            tight.max_iters = 5000;
            tight.rel_tol = 1e-15;
            const auto first = em_refine(x, truth, tight);
            const auto second = em_refine(x, first.gaussians);
            for (std::size_t c = 0; c < first.gaussians.size(); ++c) {
                CHECK((second.gaussians[c].mean() - first.gaussians[c].mean()).cwiseAbs().maxCoeff() <= 1e-6);
                CHECK((second.gaussians[c].variance() - first.gaussians[c].variance()).cwiseAbs().maxCoeff() <= 1e-6);
            }
        }
    }

    TEST_CASE("a component with no mass keeps its parameters") {
        const Matrix x = two_clusters(9);
        const ClassGaussian far(Vector::Constant(2, 1e4), Vector::Zero(2));
        const std::vector<ClassGaussian> init{ClassGaussian(Vector::Constant(2, 4.0), Vector::Zero(2)),
                                              ClassGaussian(Vector::Constant(2, -4.0), Vector::Zero(2)), far};
        const auto res = em_refine(x, init);
        CHECK(res.gaussians[2].mean() == far.mean());
        CHECK(res.gaussians[2].log_var() == far.log_var());
        CHECK(res.responsibilities.col(2).maxCoeff() < 1e-8);
    }

    TEST_CASE("input checks") {
        const std::vector<ClassGaussian> two{ClassGaussian(Vector::Zero(2), Vector::Zero(2)),
                                             ClassGaussian(Vector::Ones(2), Vector::Zero(2))};
        CHECK_THROWS_AS(em_refine(Matrix::Zero(1, 2), two), DataValidationError);
        CHECK_THROWS_AS(em_refine(Matrix::Zero(4, 3), two), DimensionError);
        EmConfig bad;
        bad.max_iters = 0;
        CHECK_THROWS_AS(em_refine(Matrix::Zero(4, 2), two, bad), ConfigError);
        bad.max_iters = 1;
        bad.rel_tol = 0.0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_SUITE("responsibilities") {
    TEST_CASE("mixing weights stay uniform: posteriors are normalized densities") {
        Rng rng(11);
        const auto comps = random_components(rng, 3, 2);
        const Matrix x = random_matrix(rng, 20, 2, 3.0);
        const Matrix r = responsibilities(x, comps);
        for (Eigen::Index n = 0; n < x.rows(); ++n) {
            long double dens[3], total = 0;
            for (int c = 0; c < 3; ++c) {
                dens[c] = std::exp(static_cast<long double>(log_density(x.row(n).transpose(), comps[static_cast<std::size_t>(c)])));
                total += dens[c];
            }
            for (int c = 0; c < 3; ++c) CHECK(std::abs(r(n, c) - static_cast<double>(dens[c] / total)) <= 1e-12);
        }
    }

    TEST_CASE("identical components split evenly") {
        const ClassGaussian g(Vector::Zero(2), Vector::Zero(2));
        const Matrix r = responsibilities(Matrix::Ones(3, 2), std::vector<ClassGaussian>{g, g});
        CHECK((r.array() - 0.5).abs().maxCoeff() < 1e-15);
    }

    TEST_CASE("far-apart points do not underflow to NaN") {
        // Every density underflows a double here; log-sum-exp still normalizes.
        const std::vector<ClassGaussian> comps{ClassGaussian(Vector::Zero(1), Vector::Zero(1)),
                                               ClassGaussian(Vector::Constant(1, 1.0), Vector::Zero(1))};
        const Matrix r = responsibilities(Matrix::Constant(1, 1, 1e3), comps);
        CHECK(r.allFinite());
        CHECK(r(0, 1) == doctest::Approx(1.0));
    }
}

TEST_SUITE("gmm_log_likelihood") {
    TEST_CASE("one component is the plain log-likelihood") {
        Rng rng(21);
        const Matrix x = random_matrix(rng, 30, 4);
        const ClassGaussian g(random_vector(rng, 4), random_vector(rng, 4, 0.3));
        CHECK(gmm_log_likelihood(x, std::vector{g}) == doctest::Approx(log_density_rows(x, g).sum()).epsilon(1e-14));
    }

    TEST_CASE("a duplicated component changes nothing") {
        Rng rng(22);
        const Matrix x = random_matrix(rng, 30, 2);
        const ClassGaussian g(random_vector(rng, 2), random_vector(rng, 2, 0.3));
        CHECK(gmm_log_likelihood(x, std::vector{g, g}) == doctest::Approx(gmm_log_likelihood(x, std::vector{g})).epsilon(1e-14));
    }

    TEST_CASE("50 points, 3 components against long-double summation") {
        Rng rng(23);
        const auto comps = random_components(rng, 3, 3);
        const Matrix x = random_matrix(rng, 50, 3, 2.0);
        long double total = 0;
        for (Eigen::Index n = 0; n < 50; ++n) {
            long double mix = 0;
            for (const auto& g : comps) {
                long double log_p = 0;
                for (int d = 0; d < 3; ++d) {
                    const long double var = std::exp(static_cast<long double>(g.log_var()(d)));
                    const long double diff = x(n, d) - g.mean()(d);
                    log_p += -0.5L * std::log(2.0L * 3.14159265358979323846264338327950288L * var) - diff * diff / (2.0L * var);
                }
                mix += std::exp(log_p) / 3.0L;
            }
            total += std::log(mix);
        }
        CHECK(std::abs(gmm_log_likelihood(x, comps) - static_cast<double>(total)) <= 1e-9);
    }

    TEST_CASE("empty mixture") {
        CHECK_THROWS_AS(gmm_log_likelihood(Matrix::Zero(2, 2), std::vector<ClassGaussian>{}), ConfigError);
    }
}
