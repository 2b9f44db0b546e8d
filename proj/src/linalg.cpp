#include "zsar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "zsar/errors.hpp"

namespace zsar {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPencilTol = 1e-12;

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

Matrix symmetrized(const Matrix& m, const char* what) {
    require_square(m, what);
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        throw DimensionError(std::string(what) + ": matrix is not symmetric");
    }
    return 0.5 * (m + m.transpose());
}

}  // namespace

void KernelSpec::validate() const {
    if (kind == KernelKind::Rbf && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
        throw ConfigError("RBF bandwidth must be positive and finite, got " + std::to_string(bandwidth));
    }
}

const char* to_string(KernelKind kind) {
    return kind == KernelKind::Rbf ? "rbf" : "linear";
}

KernelKind parse_kernel_kind(const std::string& name) {
    if (name == "rbf") return KernelKind::Rbf;
    if (name == "linear") return KernelKind::Linear;
    throw ConfigError("unknown kernel '" + name + "' (expected rbf or linear)");
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

SymmetricEigen sym_eig(const Matrix& m) {
    const Matrix sym = symmetrized(m, "sym_eig");
    // Eigen's column-major solver; convert back to our row-major carrier.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(sym), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_eig: eigendecomposition did not converge");
    }
    return {solver.eigenvalues(), Matrix(solver.eigenvectors())};
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
    require_square(a, "solve_sylvester(a)");
    require_square(b, "solve_sylvester(b)");
    if (c.rows() != a.rows() || c.cols() != b.rows()) {
        throw DimensionError("solve_sylvester: c must be " + std::to_string(a.rows()) + "x" +
                             std::to_string(b.rows()));
    }
    const SymmetricEigen ea = sym_eig(a);
    const SymmetricEigen eb = sym_eig(b);

    Matrix rotated = ea.vectors.transpose() * c * eb.vectors;
    for (Eigen::Index i = 0; i < rotated.rows(); ++i) {
        for (Eigen::Index j = 0; j < rotated.cols(); ++j) {
            const double denom = ea.values(i) + eb.values(j);
            if (denom <= kPencilTol) {
                throw SingularPencilError("solve_sylvester: eigenvalue sum " + std::to_string(denom) +
                                          " at (" + std::to_string(i) + ", " + std::to_string(j) +
                                          ") is not positive");
            }
            rotated(i, j) /= denom;
        }
    }
    Matrix w = ea.vectors * rotated * eb.vectors.transpose();
    if (!w.allFinite()) {
        throw NumericalError("solve_sylvester: non-finite solution");
    }
    return w;
}

Matrix kernel_matrix(const Matrix& rows_attrs, const Matrix& cols_attrs, const KernelSpec& spec) {
    spec.validate();
    if (rows_attrs.cols() != cols_attrs.cols()) {
        throw DimensionError("kernel_matrix: attribute dimensions differ (" +
                             std::to_string(rows_attrs.cols()) + " vs " +
                             std::to_string(cols_attrs.cols()) + ")");
    }
    Matrix gram = rows_attrs * cols_attrs.transpose();
    if (spec.kind == KernelKind::Linear) {
        return gram;
    }
    const double inv_two_h2 = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
    Matrix out(rows_attrs.rows(), cols_attrs.rows());
    for (Eigen::Index i = 0; i < rows_attrs.rows(); ++i) {
        for (Eigen::Index j = 0; j < cols_attrs.rows(); ++j) {
            // Direct difference rather than the expanded gram form: keeps the
            // self-kernel diagonal at exactly 1.
            const double d2 = (rows_attrs.row(i) - cols_attrs.row(j)).squaredNorm();
            out(i, j) = std::exp(-d2 * inv_two_h2);
        }
    }
    return out;
}

double median_bandwidth(const Matrix& attrs) {
    const Eigen::Index n = attrs.rows();
    if (n < 2) {
        throw DataValidationError("median_bandwidth: need at least two attribute rows");
    }
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            dists.push_back((attrs.row(i) - attrs.row(j)).norm());
        }
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    const double median = (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (dists.back() == 0.0) {
        throw DataValidationError("median_bandwidth: all attribute rows are identical");
    }
    if (median == 0.0) {
        // Over half the pairs coincide; fall back to the mean of the nonzero distances.
        double sum = 0.0;
        std::size_t count = 0;
        for (double d : dists) {
            if (d > 0.0) {
                sum += d;
                ++count;
            }
        }
        return sum / static_cast<double>(count);
    }
    return median;
}

Matrix ridge_solve(const Matrix& targets, const Matrix& inputs, double lambda) {
    if (!(lambda > 0.0)) {
        throw ConfigError("ridge_solve: lambda must be positive");
    }
    if (targets.cols() != inputs.cols()) {
        throw DimensionError("ridge_solve: targets and inputs disagree on sample count");
    }
    Eigen::MatrixXd gram = inputs * inputs.transpose();
    gram.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    // (X X^T + lambda I) W^T = X T^T
    const Eigen::MatrixXd rhs = inputs * targets.transpose();
    Matrix w = ldlt.solve(rhs).transpose();
    if (!w.allFinite()) {
        throw NumericalError("ridge_solve: non-finite solution");
    }
    return w;
}

}  // namespace zsar
