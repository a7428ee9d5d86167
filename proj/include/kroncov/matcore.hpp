#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "kroncov/errors.hpp"

namespace kroncov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Dense symmetric matrix with the lower triangle authoritative: the upper
// triangle is always an exact mirror, so eigensolvers see bit-identical input
// regardless of how the matrix was assembled.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : m_(Matrix::Zero(dim, dim)) {}

    // Mirrors the lower triangle of `a` onto the upper. `check_tol`, when
    // non-negative, rejects inputs whose asymmetry exceeds it.
    static SymMatrix from(const Matrix& a, double check_tol = -1.0);
    static SymMatrix identity(int dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& mat() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    double& lower(int i, int j);  // i >= j; keeps the mirror in sync via sync()
    void sync();                  // re-mirror lower triangle onto upper

private:
    explicit SymMatrix(Matrix m) : m_(std::move(m)) {}
    friend SymMatrix sym_from_raw(Matrix m);
    Matrix m_;
};

// Trusted constructor for internal use: `m` must already be exactly symmetric.
SymMatrix sym_from_raw(Matrix m);

// Eigendecomposition of a symmetric positive definite matrix.
// Eigenvalues ascending, Q orthogonal with A = Q diag(lambda) Q'.
struct SpdEigen {
    Vector eigenvalues;
    Matrix Q;

    Matrix reconstruct() const { return Q * eigenvalues.asDiagonal() * Q.transpose(); }
    Matrix apply_function(const std::function<double(double)>& f) const;
};

// Relative floor below which an eigenvalue counts as a positivity failure.
inline constexpr double kSpdTolerance = 1e-10;
// Kernels materialize as dense n^2 x n^2 only up to this dimension.
inline constexpr int kDenseKernelLimit = 64;
// Hard cap on materialized Kronecker products and design matrices.
inline constexpr int kMaxDim = 4096;

SpdEigen spd_eigen(const SymMatrix& a);
SpdEigen sym_eigen(const SymMatrix& a);  // no positivity requirement

// Principal logarithm / exponential of symmetric matrices via eigendecomposition.
SymMatrix spd_log(const SymMatrix& a);
SymMatrix sym_exp(const SymMatrix& omega);

// Divided-difference entries of the Frechet-derivative kernels, with the
// confluent limit taken when the eigenvalues are closer than 1e-8 relative.
double dd_log_entry(double li, double lj);   // (log li - log lj)/(li - lj), limit 1/li
double dd_exp_entry(double wi, double wj);   // (e^wi - e^wj)/(wi - wj), limit e^wi

// Linear operator on vec-space that is diagonal in an eigenbasis: applying it
// conjugates into the basis, scales entrywise by a kernel of divided
// differences, and conjugates back. Covers both d log (at an SPD point) and
// d exp (at a symmetric point).
class EigenbasisKernel {
public:
    // d log at Theta: pair entry dd_log(lambda_i, lambda_j).
    static EigenbasisKernel log_kernel(const SymMatrix& theta);
    static EigenbasisKernel log_kernel(const SpdEigen& eig);
    // d exp at Omega: pair entry dd_exp(omega_i, omega_j).
    static EigenbasisKernel exp_kernel(const SymMatrix& omega);
    static EigenbasisKernel exp_kernel(const SpdEigen& eig);

    int dim() const { return static_cast<int>(entries_.rows()); }
    // K * vec(B) for symmetric B, returned as the matrix it is the vec of.
    Matrix apply(const Matrix& b) const;
    Vector apply_vec(const Vector& vec_b) const;
    // Dense n^2 x n^2 realization; only for dim() <= kDenseKernelLimit.
    Matrix dense() const;

    const Matrix& pair_entries() const { return entries_; }
    const Matrix& basis() const { return Q_; }

private:
    EigenbasisKernel(Matrix q, Matrix entries) : Q_(std::move(q)), entries_(std::move(entries)) {}
    Matrix Q_;
    Matrix entries_;  // entries_(i,j) = kernel value for eigenvalue pair (i,j)
};

// vech / duplication / commutation plumbing.

// Position of (i,j), i >= j, in the column-stacked lower triangle.
inline int vech_index(int n, int i, int j) { return j * n - j * (j + 1) / 2 + i; }
inline int vech_size(int n) { return n * (n + 1) / 2; }

Vector vech(const Matrix& a);
SymMatrix unvech(const Vector& v);

SparseMatrix duplication(int n);        // D_n, n^2 x n(n+1)/2, entries in {1}
SparseMatrix pinv_duplication(int n);   // D_n^+, entries in {1, 1/2}
SparseMatrix commutation(int m, int n); // K_{m,n}, permutation
// I_a (x) K_{q,m} (x) I_b, the permutation sending vec A (x) vec B parts onto
// vec of the Kronecker product.
SparseMatrix kron_commutation(int a, int q, int m, int b);
SparseMatrix vec_perm_P(int n);         // I_n (x) K_{n,n} (x) I_n

// D_n' * u without materializing D_n: adds the two mirrored vec entries for
// each off-diagonal vech coordinate.
Vector apply_duplication_t(const Vector& u, int n);
// D_n^+' * v: spreads off-diagonal vech entries as halves onto both mirrored
// vec positions, i.e. vec of the symmetric matrix with those halves.
Vector apply_pinv_duplication_t(const Vector& v, int n);

// Kronecker products.

Matrix kron(const Matrix& a, const Matrix& b);
// Materialized A_1 (x) ... (x) A_v; throws DimensionOverflow past kMaxDim.
Matrix kron_chain(const std::vector<Matrix>& factors);
// (A_1 (x) ... (x) A_v) x without materializing, via the mixed-product rule.
Vector kron_apply(const std::vector<Matrix>& factors, const Vector& x);

}  // namespace kroncov
