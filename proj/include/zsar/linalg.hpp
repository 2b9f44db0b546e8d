#pragma once

#include <string>

#include <Eigen/Dense>

namespace zsar {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class KernelKind { Rbf, Linear };

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double bandwidth = 1.0;  // RBF only

    static KernelSpec rbf(double bandwidth) { return {KernelKind::Rbf, bandwidth}; }
    static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }

    void validate() const;
};

const char* to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

struct SymmetricEigen {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns
};

/// Eigendecomposition of a symmetric matrix. The input is symmetrized by
/// averaging with its transpose first; asymmetry beyond 1e-9 relative is
/// rejected.
SymmetricEigen sym_eig(const Matrix& m);

/// Solves aW + Wb = c for symmetric a (d x d) and b (s x s).
///
/// Both operands are diagonalized, a = Ua La Ua^T and b = Ub Lb Ub^T, which
/// turns the equation into the elementwise system
/// (La_i + Lb_j) W~_ij = (Ua^T c Ub)_ij. Throws SingularPencilError when some
/// La_i + Lb_j <= 1e-12.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Pairwise kernel values between the rows of `rows_attrs` and `cols_attrs`.
Matrix kernel_matrix(const Matrix& rows_attrs, const Matrix& cols_attrs, const KernelSpec& spec);

/// Median of pairwise Euclidean distances between rows (i < j).
double median_bandwidth(const Matrix& attrs);

/// argmin_W ||T - W X||_F^2 + lambda ||W||_F^2 with T d x n and X k x n.
Matrix ridge_solve(const Matrix& targets, const Matrix& inputs, double lambda);

bool all_finite(const Matrix& m);

}  // namespace zsar
