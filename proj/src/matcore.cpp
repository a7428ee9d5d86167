#include "kroncov/matcore.hpp"

#include <cmath>
#include <functional>

namespace kroncov {

SymMatrix SymMatrix::from(const Matrix& a, double check_tol) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw BadInput("SymMatrix requires a square matrix of dimension >= 1");
    }
    if (check_tol >= 0.0) {
        double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
        if (asym > check_tol) {
            throw BadInput("matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
        }
    }
    Matrix m = a;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = j + 1; i < m.rows(); ++i) m(j, i) = m(i, j);
    return SymMatrix(std::move(m));
}

double& SymMatrix::lower(int i, int j) { return m_(i, j); }

void SymMatrix::sync() {
    for (int j = 0; j < m_.cols(); ++j)
        for (int i = j + 1; i < m_.rows(); ++i) m_(j, i) = m_(i, j);
}

SymMatrix sym_from_raw(Matrix m) { return SymMatrix(std::move(m)); }

Matrix SpdEigen::apply_function(const std::function<double(double)>& f) const {
    Vector fv = eigenvalues.unaryExpr([&](double x) { return f(x); });
    return Q * fv.asDiagonal() * Q.transpose();
}

SpdEigen sym_eigen(const SymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
    if (solver.info() != Eigen::Success) {
        throw Error("eigen_failure", "symmetric eigendecomposition did not converge");
    }
    return SpdEigen{solver.eigenvalues(), solver.eigenvectors()};
}

SpdEigen spd_eigen(const SymMatrix& a) {
    SpdEigen eig = sym_eigen(a);
    double lmax = eig.eigenvalues(eig.eigenvalues.size() - 1);
    double lmin = eig.eigenvalues(0);
    if (lmin <= kSpdTolerance * std::max(lmax, 0.0)) {
        throw NotPositiveDefinite(lmin);
    }
    return eig;
}

SymMatrix spd_log(const SymMatrix& a) {
    SpdEigen eig = spd_eigen(a);
    Matrix out = eig.apply_function([](double x) { return std::log(x); });
    return SymMatrix::from(out);
}

SymMatrix sym_exp(const SymMatrix& omega) {
    SpdEigen eig = sym_eigen(omega);
    Matrix out = eig.apply_function([](double x) { return std::exp(x); });
    return SymMatrix::from(out);
}

namespace {
constexpr double kConfluentRel = 1e-8;
}

double dd_log_entry(double li, double lj) {
    double d = li - lj;
    if (std::abs(d) <= kConfluentRel * std::max(li, lj)) return 1.0 / li;
    // log(li) - log(lj) written as log1p to avoid cancellation for close pairs
    return std::log1p(d / lj) / d;
}

double dd_exp_entry(double wi, double wj) {
    double d = wi - wj;
    if (std::abs(d) <= kConfluentRel * std::max(std::abs(wi), std::abs(wj))) return std::exp(wi);
    return std::exp(wj) * std::expm1(d) / d;
}

EigenbasisKernel EigenbasisKernel::log_kernel(const SymMatrix& theta) {
    return log_kernel(spd_eigen(theta));
}

EigenbasisKernel EigenbasisKernel::log_kernel(const SpdEigen& eig) {
    const int n = static_cast<int>(eig.eigenvalues.size());
    Matrix k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k(i, j) = dd_log_entry(eig.eigenvalues(i), eig.eigenvalues(j));
    return EigenbasisKernel(eig.Q, std::move(k));
}

EigenbasisKernel EigenbasisKernel::exp_kernel(const SymMatrix& omega) {
    return exp_kernel(sym_eigen(omega));
}

EigenbasisKernel EigenbasisKernel::exp_kernel(const SpdEigen& eig) {
    const int n = static_cast<int>(eig.eigenvalues.size());
    Matrix k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k(i, j) = dd_exp_entry(eig.eigenvalues(i), eig.eigenvalues(j));
    return EigenbasisKernel(eig.Q, std::move(k));
}

Matrix EigenbasisKernel::apply(const Matrix& b) const {
    Matrix inner = Q_.transpose() * b * Q_;
    inner.array() *= entries_.array();
    return Q_ * inner * Q_.transpose();
}

Vector EigenbasisKernel::apply_vec(const Vector& vec_b) const {
    const int n = dim();
    Eigen::Map<const Matrix> b(vec_b.data(), n, n);
    Matrix out = apply(b);
    return Eigen::Map<Vector>(out.data(), n * n);
}

Matrix EigenbasisKernel::dense() const {
    const int n = dim();
    if (n > kDenseKernelLimit) {
        throw DimensionOverflow("dense kernel requested for n = " + std::to_string(n) +
                                " > limit " + std::to_string(kDenseKernelLimit));
    }
    // Q2 (K diag) Q2' with Q2 = Q (x) Q and the kernel entries in vec order
    Matrix q2 = kron(Q_, Q_);
    Vector diag(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) diag(j * n + i) = entries_(i, j);
    return q2 * diag.asDiagonal() * q2.transpose();
}

Vector vech(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    Vector v(vech_size(n));
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) v(k++) = a(i, j);
    return v;
}

SymMatrix unvech(const Vector& v) {
    const int m = static_cast<int>(v.size());
    int n = static_cast<int>(std::lround((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0));
    if (vech_size(n) != m) throw BadInput("vector length is not a triangular number");
    SymMatrix out(n);
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) out.lower(i, j) = v(k++);
    out.sync();
    return out;
}

SparseMatrix duplication(int n) {
    SparseMatrix d(n * n, vech_size(n));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) {
            int col = vech_index(n, i, j);
            trip.emplace_back(j * n + i, col, 1.0);
            if (i != j) trip.emplace_back(i * n + j, col, 1.0);
        }
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

SparseMatrix pinv_duplication(int n) {
    SparseMatrix d(vech_size(n), n * n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) {
            int row = vech_index(n, i, j);
            if (i == j) {
                trip.emplace_back(row, j * n + i, 1.0);
            } else {
                trip.emplace_back(row, j * n + i, 0.5);
                trip.emplace_back(row, i * n + j, 0.5);
            }
        }
    }
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

SparseMatrix commutation(int m, int n) {
    SparseMatrix k(m * n, m * n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * n);
    // K vec(A) = vec(A') for m x n A: entry (i,j) of A sits at j*m+i in vec(A)
    // and at i*n+j in vec(A').
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) trip.emplace_back(i * n + j, j * m + i, 1.0);
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

SparseMatrix kron_commutation(int a, int q, int m, int b) {
    long dim = static_cast<long>(a) * q * m * b;
    SparseMatrix p(dim, dim);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(dim);
    // K_{q,m} maps vec-position c*q + r to r*m + c.
    for (long ia = 0; ia < a; ++ia) {
        for (long r = 0; r < q; ++r) {
            for (long c = 0; c < m; ++c) {
                long row_mid = r * m + c;
                long col_mid = c * q + r;
                for (long ib = 0; ib < b; ++ib) {
                    trip.emplace_back((ia * q * m + row_mid) * b + ib,
                                      (ia * q * m + col_mid) * b + ib, 1.0);
                }
            }
        }
    }
    p.setFromTriplets(trip.begin(), trip.end());
    return p;
}

SparseMatrix vec_perm_P(int n) { return kron_commutation(n, n, n, n); }

Vector apply_duplication_t(const Vector& u, int n) {
    Vector out(vech_size(n));
    for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) {
            double v = u(j * n + i);
            if (i != j) v += u(i * n + j);
            out(vech_index(n, i, j)) = v;
        }
    }
    return out;
}

Vector apply_pinv_duplication_t(const Vector& v, int n) {
    Vector out(n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) {
            double x = v(vech_index(n, i, j));
            if (i == j) {
                out(j * n + i) = x;
            } else {
                out(j * n + i) = 0.5 * x;
                out(i * n + j) = 0.5 * x;
            }
        }
    }
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix kron_chain(const std::vector<Matrix>& factors) {
    if (factors.empty()) throw BadInput("kron_chain requires at least one factor");
    long total = 1;
    for (const Matrix& f : factors) {
        total *= f.rows();
        if (total > kMaxDim) {
            throw DimensionOverflow("kron_chain dimension exceeds " + std::to_string(kMaxDim));
        }
    }
    Matrix out = factors[0];
    for (std::size_t j = 1; j < factors.size(); ++j) out = kron(out, factors[j]);
    return out;
}

Vector kron_apply(const std::vector<Matrix>& factors, const Vector& x) {
    long n = 1;
    for (const Matrix& f : factors) n *= f.rows();
    if (x.size() != n) throw BadInput("kron_apply: vector length does not match factor product");
    // Contract one factor at a time: each factor acts along its own index,
    // which is a reshaped matrix product at stride `right`.
    Vector cur = x;
    long right = n;
    for (const Matrix& a : factors) {
        long m = a.rows();
        right /= m;
        long left = n / (m * right);
        Vector next(n);
        for (long l = 0; l < left; ++l) {
            Eigen::Map<const Matrix> blk(cur.data() + l * m * right, right, m);
            Eigen::Map<Matrix> out(next.data() + l * m * right, right, m);
            out = blk * a.transpose();
        }
        cur.swap(next);
    }
    return cur;
}

}  // namespace kroncov
