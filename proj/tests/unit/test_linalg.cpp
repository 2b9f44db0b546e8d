#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "zsar/errors.hpp"
#include "zsar/linalg.hpp"

using namespace zsar;
using testing::random_matrix;
using testing::random_pd;
using testing::random_psd;

namespace {

double sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& w) {
    return (a * w + w * b - c).norm() / (1.0 + c.norm());
}

Matrix random_symmetric(Rng& rng, Eigen::Index n) {
    const Matrix g = random_matrix(rng, n, n);
    return 0.5 * (g + g.transpose());
}

}  // namespace

TEST_SUITE("sym_eig") {
    TEST_CASE("identity has unit eigenvalues and an orthonormal basis") {
        const auto e = sym_eig(Matrix::Identity(3, 3));
        CHECK((e.values - Vector::Ones(3)).norm() < 1e-14);
        CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)).norm() < 1e-12);
    }

    TEST_CASE("diag(4,1) sorts ascending with axis-aligned vectors") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 4;
        m(1, 1) = 1;
        const auto e = sym_eig(m);
        CHECK(e.values(0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e.values(1) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(std::abs(std::abs(e.vectors(1, 0)) - 1.0) < 1e-14);
        CHECK(std::abs(std::abs(e.vectors(0, 1)) - 1.0) < 1e-14);
    }

    TEST_CASE("random symmetric 8x8 reconstructs") {
        Rng rng(101);
        const Matrix m = random_symmetric(rng, 8);
        const auto e = sym_eig(m);
        const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
        CHECK((back - m).norm() <= 1e-10);
    }

    TEST_CASE("property: orthonormal vectors, ascending values, small reconstruction error") {
        Rng rng(102);
        for (int trial = 0; trial < 50; ++trial) {
            const int n = testing::uniform_int(rng, 1, 30);
            const Matrix m = random_symmetric(rng, n) * std::pow(10.0, testing::uniform_int(rng, -3, 3));
            const auto e = sym_eig(m);
            CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm() <= 1e-9 * n);
            CHECK(std::is_sorted(e.values.data(), e.values.data() + n));
            const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
            CHECK((back - m).norm() <= 1e-8 * (1.0 + m.norm()));
        }
    }

    TEST_CASE("round-off asymmetry is absorbed, real asymmetry is rejected") {
        Rng rng(103);
        Matrix m = random_symmetric(rng, 5);
        m(0, 1) += 1e-13;
        CHECK_NOTHROW(sym_eig(m));
        m(0, 1) += 1e-3;
        CHECK_THROWS_AS(sym_eig(m), DimensionError);
    }

    TEST_CASE("non-square input is a dimension error") {
        CHECK_THROWS_AS(sym_eig(Matrix::Zero(2, 3)), DimensionError);
    }
}

TEST_SUITE("solve_sylvester") {
    TEST_CASE("a = b = I halves c") {
        Matrix c(2, 2);
        c << 2, 4, 6, 8;
        Matrix expected(2, 2);
        expected << 1, 2, 3, 4;
        const Matrix w = solve_sylvester(Matrix::Identity(2, 2), Matrix::Identity(2, 2), c);
        CHECK((w - expected).norm() < 1e-14);
    }

    TEST_CASE("diagonal operands give 1 / (a_i + b_j)") {
        Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
        a.diagonal() << 1, 2;
        b.diagonal() << 3, 4;
        Matrix expected(2, 2);
        expected << 1.0 / 4, 1.0 / 5, 1.0 / 5, 1.0 / 6;
        const Matrix w = solve_sylvester(a, b, Matrix::Ones(2, 2));
        CHECK((w - expected).norm() < 1e-15);
    }

    TEST_CASE("random PSD a (20x20) and PD b (15x15)") {
        Rng rng(201);
        const Matrix a = random_psd(rng, 20, 7);
        const Matrix b = random_pd(rng, 15);
        const Matrix c = random_matrix(rng, 20, 15);
        CHECK(sylvester_residual(a, b, c, solve_sylvester(a, b, c)) <= 1e-8);
    }

    TEST_CASE("property: residual bound over random sizes and scales") {
        Rng rng(202);
        for (int trial = 0; trial < 100; ++trial) {
            const int d = testing::uniform_int(rng, 1, 40);
            const int s = testing::uniform_int(rng, 1, 30);
            const Matrix a = random_psd(rng, d, testing::uniform_int(rng, 1, d)) * rng.uniform() * 10.0;
            const Matrix b = random_pd(rng, s, 1e-3 + rng.uniform());
            const Matrix c = random_matrix(rng, d, s, 100.0 * rng.uniform());
            CHECK(sylvester_residual(a, b, c, solve_sylvester(a, b, c)) <= 1e-8);
        }
    }

    TEST_CASE("property: linear in c") {
        Rng rng(203);
        for (int trial = 0; trial < 30; ++trial) {
            const int d = testing::uniform_int(rng, 1, 15);
            const int s = testing::uniform_int(rng, 1, 15);
            const Matrix a = random_psd(rng, d, d);
            const Matrix b = random_pd(rng, s);
            const Matrix c1 = random_matrix(rng, d, s);
            const Matrix c2 = random_matrix(rng, d, s);
            const double alpha = rng.normal() * 3.0, beta = rng.normal() * 3.0;
            const Matrix lhs = solve_sylvester(a, b, alpha * c1 + beta * c2);
            const Matrix rhs = alpha * solve_sylvester(a, b, c1) + beta * solve_sylvester(a, b, c2);
            CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));
        }
    }

    TEST_CASE("zero eigenvalue sum raises SingularPencilError") {
        const Matrix z = Matrix::Zero(2, 2);
        CHECK_THROWS_AS(solve_sylvester(z, z, Matrix::Ones(2, 2)), SingularPencilError);
        // The category maps to numerical failure, not input error.
        try {
            solve_sylvester(z, z, Matrix::Ones(2, 2));
        } catch (const Error& e) {
            CHECK(e.category() == Error::Category::Numerical);
        }
    }

    TEST_CASE("shape mismatch of c") {
        CHECK_THROWS_AS(solve_sylvester(Matrix::Identity(2, 2), Matrix::Identity(3, 3), Matrix::Ones(3, 2)),
                        DimensionError);
    }
}

TEST_SUITE("kernel_matrix") {
    TEST_CASE("RBF of a point with itself is 1") {
        Rng rng(301);
        const Matrix a = random_matrix(rng, 1, 6);
        CHECK(kernel_matrix(a, a, KernelSpec::rbf(0.7))(0, 0) == 1.0);
    }

    TEST_CASE("RBF analytic value") {
        Matrix a(1, 2), b(1, 2);
        a << 0, 0;
        b << 0, 2;
        const double k = kernel_matrix(a, b, KernelSpec::rbf(std::sqrt(2.0)))(0, 0);
        CHECK(k == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(k == doctest::Approx(0.367879).epsilon(1e-6));
    }

    TEST_CASE("linear kernel of an orthonormal set is the identity") {
        Rng rng(302);
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(rng, 5, 5)));
        const Matrix q = Eigen::MatrixXd(qr.householderQ());
        CHECK((kernel_matrix(q, q, KernelSpec::linear()) - Matrix::Identity(5, 5)).norm() < 1e-12);
    }

    TEST_CASE("property: self-kernels are symmetric PSD") {
        Rng rng(303);
        for (int trial = 0; trial < 40; ++trial) {
            const int n = testing::uniform_int(rng, 2, 25);
            const int k = testing::uniform_int(rng, 1, 10);
            const Matrix attrs = random_matrix(rng, n, k);
            for (const auto spec : {KernelSpec::rbf(0.1 + 3.0 * rng.uniform()), KernelSpec::linear()}) {
                const Matrix km = kernel_matrix(attrs, attrs, spec);
                CHECK((km - km.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
                const double smallest = sym_eig(km).values(0);
                CHECK(smallest >= -1e-9 * km.trace());
            }
        }
    }

    TEST_CASE("attribute dimension mismatch") {
        CHECK_THROWS_AS(kernel_matrix(Matrix::Zero(2, 3), Matrix::Zero(2, 4), KernelSpec::linear()), DimensionError);
    }

    TEST_CASE("non-positive bandwidth is rejected") {
        CHECK_THROWS_AS(KernelSpec::rbf(0.0).validate(), ConfigError);
        CHECK_THROWS_AS(kernel_matrix(Matrix::Zero(2, 3), Matrix::Zero(2, 3), KernelSpec::rbf(-1.0)), ConfigError);
    }
}

TEST_SUITE("median_bandwidth") {
    TEST_CASE("single pair") {
        Matrix a(2, 1);
        a << 0, 1;
        CHECK(median_bandwidth(a) == 1.0);
    }

    TEST_CASE("three pairs") {
        Matrix a(3, 1);
        a << 0, 1, 3;
        CHECK(median_bandwidth(a) == 2.0);
    }

    TEST_CASE("50 random rows against a brute-force median of 1225 distances") {
        Rng rng(401);
        const Matrix a = random_matrix(rng, 50, 4);
        std::vector<double> d;
        for (int i = 0; i < 50; ++i)
            for (int j = i + 1; j < 50; ++j) d.push_back((a.row(i) - a.row(j)).norm());
        REQUIRE(d.size() == 1225);
        std::sort(d.begin(), d.end());
        CHECK(median_bandwidth(a) == doctest::Approx(d[612]).epsilon(1e-14));
    }

    TEST_CASE("even pair count averages the middle two") {
        Matrix a(4, 1);
        a << 0, 1, 2, 10;  // distances 1,2,10,1,9,8 -> sorted 1,1,2,8,9,10
        CHECK(median_bandwidth(a) == doctest::Approx(5.0));
    }

    TEST_CASE("identical rows are degenerate") {
        CHECK_THROWS_AS(median_bandwidth(Matrix::Ones(4, 3)), DataValidationError);
        CHECK_THROWS_AS(median_bandwidth(Matrix::Ones(1, 3)), DataValidationError);
    }

    TEST_CASE("mostly duplicated rows still give a positive bandwidth") {
        Matrix a = Matrix::Zero(5, 2);
        a(4, 0) = 3.0;  // 4 nonzero distances out of 10: the median would be 0
        CHECK(median_bandwidth(a) == doctest::Approx(3.0));
    }
}

TEST_SUITE("ridge_solve") {
    TEST_CASE("identity inputs with vanishing lambda return the targets") {
        Rng rng(501);
        const Matrix t = random_matrix(rng, 3, 4);
        CHECK((ridge_solve(t, Matrix::Identity(4, 4), 1e-12) - t).cwiseAbs().maxCoeff() < 1e-6);
    }

    TEST_CASE("exact linear relation T = 2X") {
        Rng rng(502);
        const Matrix x = random_pd(rng, 4);  // square and invertible
        CHECK((ridge_solve(2.0 * x, x, 1e-10) - 2.0 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-5);
    }

    TEST_CASE("local optimality against 100 random perturbations") {
        Rng rng(503);
        const Matrix t = random_matrix(rng, 6, 40);
        const Matrix x = random_matrix(rng, 5, 40);
        const double lambda = 0.1;
        const auto objective = [&](const Matrix& w) {
            return (t - w * x).squaredNorm() + lambda * w.squaredNorm();
        };
        const Matrix w = ridge_solve(t, x, lambda);
        const double best = objective(w);
        for (int k = 0; k < 100; ++k) {
            Matrix dir = random_matrix(rng, w.rows(), w.cols());
            dir *= 1e-3 / dir.norm();
            CHECK(objective(w + dir) >= best);
        }
    }

    TEST_CASE("matches the normal equations") {
        Rng rng(504);
        const Matrix t = random_matrix(rng, 3, 12);
        const Matrix x = random_matrix(rng, 7, 12);
        const Matrix w = ridge_solve(t, x, 0.5);
        Matrix gram = x * x.transpose();
        gram.diagonal().array() += 0.5;
        CHECK((w * gram - t * x.transpose()).norm() < 1e-10);
    }

    TEST_CASE("lambda must be positive") {
        CHECK_THROWS_AS(ridge_solve(Matrix::Ones(1, 2), Matrix::Ones(1, 2), 0.0), ConfigError);
        CHECK_THROWS_AS(ridge_solve(Matrix::Ones(1, 2), Matrix::Ones(1, 3), 1.0), DimensionError);
    }
}

TEST_CASE("kernel names round-trip") {
    CHECK(parse_kernel_kind(to_string(KernelKind::Rbf)) == KernelKind::Rbf);
    CHECK(parse_kernel_kind(to_string(KernelKind::Linear)) == KernelKind::Linear);
    CHECK_THROWS_AS(parse_kernel_kind("poly"), ConfigError);
}
