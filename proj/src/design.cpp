#include "kroncov/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace kroncov {

long FactorizationSpec::n_effective() const {
    long n = 1;
    for (int d : dims) n *= d;
    return n;
}

bool FactorizationSpec::is_binary() const {
    return std::all_of(dims.begin(), dims.end(), [](int d) { return d == 2; });
}

void FactorizationSpec::validate() const {
    if (dims.empty()) throw BadInput("factorization needs at least one factor");
    for (int d : dims) {
        if (d < 2) throw BadInput("factor dimensions must be >= 2");
    }
    long n = n_effective();
    if (n > kMaxDim) {
        throw DimensionOverflow("factorization dimension " + std::to_string(n) + " exceeds cap " +
                                std::to_string(kMaxDim));
    }
    if (pad < 0 || pad >= n) throw BadInput("padding must be in [0, n_effective)");
}

std::string FactorizationSpec::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << 'x';
        os << dims[i];
    }
    if (pad > 0) os << "+pad" << pad;
    return os.str();
}

namespace {

FactorBlocks star_layout(const FactorizationSpec& spec) {
    FactorBlocks b;
    bool binary = spec.is_binary();
    for (int d : spec.dims) {
        b.offset.push_back(b.total);
        int sz = binary ? 2 : vech_size(d);
        b.size.push_back(sz);
        b.total += sz;
    }
    return b;
}

FactorBlocks theta_layout(const FactorizationSpec& spec) {
    FactorBlocks b;
    bool binary = spec.is_binary();
    b.total = 1;  // leading tau
    for (int d : spec.dims) {
        b.offset.push_back(b.total);
        int sz = binary ? 1 : vech_size(d) - 1;
        b.size.push_back(sz);
        b.total += sz;
    }
    return b;
}

}  // namespace

SparseMatrix build_E_star(const FactorizationSpec& spec) {
    spec.validate();
    const int n = static_cast<int>(spec.n_effective());
    const int v = spec.v();
    const bool binary = spec.is_binary();
    FactorBlocks blocks = star_layout(spec);

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<long> post(v), pre(v);
    {
        long p = 1;
        for (int j = v - 1; j >= 0; --j) {
            post[j] = p;
            p *= spec.dims[j];
        }
        p = 1;
        for (int j = 0; j < v; ++j) {
            pre[j] = p;
            p *= spec.dims[j];
        }
    }

    for (int j = 0; j < v; ++j) {
        const int nj = spec.dims[j];
        const int off = blocks.offset[j];
        if (binary) {
            // a_j hits every diagonal of the product, b_j the off-diagonal
            // pairs that differ only in factor j's index.
            for (int r = 0; r < n; ++r) trip.emplace_back(vech_index(n, r, r), off + 0, 1.0);
            for (long p = 0; p < pre[j]; ++p) {
                for (long q = 0; q < post[j]; ++q) {
                    long row = (p * 2 + 1) * post[j] + q;
                    long col = (p * 2 + 0) * post[j] + q;
                    trip.emplace_back(vech_index(n, static_cast<int>(row), static_cast<int>(col)),
                                      off + 1, 1.0);
                }
            }
        } else {
            for (int beta = 0; beta < nj; ++beta) {
                for (int alpha = beta; alpha < nj; ++alpha) {
                    int coord = off + vech_index(nj, alpha, beta);
                    for (long p = 0; p < pre[j]; ++p) {
                        for (long q = 0; q < post[j]; ++q) {
                            long i = (p * nj + alpha) * post[j] + q;
                            long k = (p * nj + beta) * post[j] + q;
                            trip.emplace_back(
                                vech_index(n, static_cast<int>(i), static_cast<int>(k)), coord,
                                1.0);
                        }
                    }
                }
            }
        }
    }

    SparseMatrix e(vech_size(n), blocks.total);
    e.setFromTriplets(trip.begin(), trip.end());
    return e;
}

std::pair<SparseMatrix, Matrix> reduce_E(const SparseMatrix& e_star,
                                         const FactorizationSpec& spec) {
    const int n = static_cast<int>(spec.n_effective());
    const int v = spec.v();
    const bool binary = spec.is_binary();
    FactorBlocks star = star_layout(spec);
    FactorBlocks th = theta_layout(spec);

    std::vector<Eigen::Triplet<double>> trip;
    // tau column: vech(I_n)
    for (int r = 0; r < n; ++r) trip.emplace_back(vech_index(n, r, r), 0, 1.0);

    // Per-factor trace-free columns, lifted from E_star's columns.
    auto append_column = [&](int src_col, int dst_col, double scale) {
        for (SparseMatrix::InnerIterator it(e_star, src_col); it; ++it) {
            trip.emplace_back(it.row(), dst_col, scale * it.value());
        }
    };

    for (int j = 0; j < v; ++j) {
        const int nj = spec.dims[j];
        const int off = star.offset[j];
        int dst = th.offset[j];
        if (binary) {
            append_column(off + 1, dst, 1.0);  // b_j
            continue;
        }
        int last_diag = off + vech_index(nj, nj - 1, nj - 1);
        for (int beta = 0; beta < nj; ++beta) {
            for (int alpha = beta; alpha < nj; ++alpha) {
                if (alpha == beta && alpha == nj - 1) continue;  // dropped trace coordinate
                int src = off + vech_index(nj, alpha, beta);
                append_column(src, dst, 1.0);
                if (alpha == beta) append_column(last_diag, dst, -1.0);
                ++dst;
            }
        }
    }

    SparseMatrix e(vech_size(n), th.total);
    e.setFromTriplets(trip.begin(), trip.end());

    // Null basis: shift factor 1's trace up, factor j's down.
    Matrix null_basis = Matrix::Zero(star.total, std::max(v - 1, 0));
    for (int j = 1; j < v; ++j) {
        if (binary) {
            null_basis(star.offset[0] + 0, j - 1) = 1.0;
            null_basis(star.offset[j] + 0, j - 1) = -1.0;
        } else {
            for (int k = 0; k < spec.dims[0]; ++k) {
                null_basis(star.offset[0] + vech_index(spec.dims[0], k, k), j - 1) = 1.0;
            }
            for (int k = 0; k < spec.dims[j]; ++k) {
                null_basis(star.offset[j] + vech_index(spec.dims[j], k, k), j - 1) = -1.0;
            }
        }
    }
    return {e, null_basis};
}

DesignMatrix DesignMatrix::build(const FactorizationSpec& spec) {
    DesignMatrix dm;
    dm.spec = spec;
    dm.E_star = build_E_star(spec);
    auto [e, nb] = reduce_E(dm.E_star, spec);
    dm.E = std::move(e);
    dm.null_basis = std::move(nb);
    dm.star_blocks = star_layout(spec);
    dm.theta_blocks = theta_layout(spec);
    return dm;
}

std::vector<Matrix> unpack_theta(const DesignMatrix& dm, const Vector& theta) {
    if (theta.size() != dm.q()) throw BadInput("theta length does not match design");
    const bool binary = dm.spec.is_binary();
    const double tau = theta(0);
    std::vector<Matrix> logs;
    logs.reserve(dm.spec.dims.size());
    for (int j = 0; j < dm.spec.v(); ++j) {
        const int nj = dm.spec.dims[j];
        Matrix a = Matrix::Zero(nj, nj);
        int src = dm.theta_blocks.offset[j];
        if (binary) {
            a(0, 1) = a(1, 0) = theta(src);
        } else {
            double sum_dev = 0.0;
            for (int beta = 0; beta < nj; ++beta) {
                for (int alpha = beta; alpha < nj; ++alpha) {
                    if (alpha == beta && alpha == nj - 1) continue;
                    double val = theta(src++);
                    if (alpha == beta) {
                        a(alpha, alpha) = val;
                        sum_dev += val;
                    } else {
                        a(alpha, beta) = a(beta, alpha) = val;
                    }
                }
            }
            a(nj - 1, nj - 1) = -sum_dev;
        }
        if (j == 0) a.diagonal().array() += tau;
        logs.push_back(std::move(a));
    }
    return logs;
}

Vector pack_factor_logs(const DesignMatrix& dm, const std::vector<Matrix>& logs) {
    if (static_cast<int>(logs.size()) != dm.spec.v()) {
        throw BadInput("factor count does not match design");
    }
    const bool binary = dm.spec.is_binary();
    Vector theta = Vector::Zero(dm.theta_blocks.total);
    double tau = 0.0;
    for (int j = 0; j < dm.spec.v(); ++j) {
        const Matrix& a = logs[j];
        const int nj = dm.spec.dims[j];
        double mean = a.trace() / nj;
        tau += mean;
        int dst = dm.theta_blocks.offset[j];
        if (binary) {
            theta(dst) = a(1, 0);
        } else {
            for (int beta = 0; beta < nj; ++beta) {
                for (int alpha = beta; alpha < nj; ++alpha) {
                    if (alpha == beta && alpha == nj - 1) continue;
                    theta(dst++) = (alpha == beta) ? a(alpha, alpha) - mean : a(alpha, beta);
                }
            }
        }
    }
    theta(0) = tau;
    return theta;
}

Vector project_to_theta(const DesignMatrix& dm, const Vector& x) {
    if (x.size() != dm.star_blocks.total) throw BadInput("coordinate length does not match design");
    std::vector<Matrix> logs;
    for (int j = 0; j < dm.spec.v(); ++j) {
        const int nj = dm.spec.dims[j];
        Matrix a = Matrix::Zero(nj, nj);
        int src = dm.star_blocks.offset[j];
        if (dm.spec.is_binary()) {
            a(0, 0) = a(1, 1) = x(src);
            a(0, 1) = a(1, 0) = x(src + 1);
        } else {
            for (int beta = 0; beta < nj; ++beta) {
                for (int alpha = beta; alpha < nj; ++alpha) {
                    double val = x(src + vech_index(nj, alpha, beta));
                    a(alpha, beta) = a(beta, alpha) = val;
                }
            }
        }
        logs.push_back(std::move(a));
    }
    return pack_factor_logs(dm, logs);
}

Vector theta_to_rho(const DesignMatrix& dm, const Vector& theta) {
    if (!dm.spec.is_binary()) throw BadInput("theta_to_rho requires an all-binary factorization");
    const int v = dm.spec.v();
    Vector rho(v);
    for (int j = 0; j < v; ++j) rho(j) = std::tanh(theta(j + 1));
    return rho;
}

Vector rho_to_theta(const DesignMatrix& dm, const Vector& rho) {
    if (!dm.spec.is_binary()) throw BadInput("rho_to_theta requires an all-binary factorization");
    const int v = dm.spec.v();
    if (rho.size() != v) throw BadInput("rho length does not match factor count");
    Vector theta(v + 1);
    double tau = 0.0;
    for (int j = 0; j < v; ++j) {
        if (!(std::abs(rho(j)) < 1.0)) throw RhoOutOfRange(rho(j));
        theta(j + 1) = std::atanh(rho(j));
        tau += 0.5 * std::log1p(-rho(j) * rho(j));
    }
    theta(0) = tau;
    return theta;
}

KroneckerCorrelation::KroneckerCorrelation(std::vector<Matrix> factors)
    : factors_(std::move(factors)) {
    if (factors_.empty()) throw BadInput("KroneckerCorrelation needs at least one factor");
}

int KroneckerCorrelation::dim() const {
    long n = 1;
    for (const Matrix& f : factors_) n *= f.rows();
    return static_cast<int>(n);
}

Matrix KroneckerCorrelation::full() const { return kron_chain(factors_); }

Matrix KroneckerCorrelation::inverse() const {
    std::vector<Matrix> inv;
    inv.reserve(factors_.size());
    for (const Matrix& f : factors_) {
        Eigen::LDLT<Matrix> ldlt(f);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw NotPositiveDefinite(0.0, "KroneckerCorrelation factor inverse");
        }
        inv.push_back(ldlt.solve(Matrix::Identity(f.rows(), f.cols())));
    }
    return kron_chain(inv);
}

Matrix KroneckerCorrelation::log_full() const {
    const int n = dim();
    if (n > kMaxDim) throw DimensionOverflow("log_full dimension exceeds cap");
    Matrix out = Matrix::Zero(n, n);
    long pre = 1;
    long post = n;
    for (const Matrix& f : factors_) {
        const int nj = static_cast<int>(f.rows());
        post /= nj;
        Matrix lf = spd_log(SymMatrix::from(f, 1e-12)).mat();
        for (long p = 0; p < pre; ++p) {
            for (int a = 0; a < nj; ++a) {
                for (int b = 0; b < nj; ++b) {
                    if (lf(a, b) == 0.0) continue;
                    for (long q = 0; q < post; ++q) {
                        out((p * nj + a) * post + q, (p * nj + b) * post + q) += lf(a, b);
                    }
                }
            }
        }
        pre *= nj;
    }
    return out;
}

double KroneckerCorrelation::logdet() const {
    const long n = dim();
    double ld = 0.0;
    for (const Matrix& f : factors_) {
        SpdEigen eig = spd_eigen(SymMatrix::from(f, 1e-12));
        ld += (n / f.rows()) * eig.eigenvalues.array().log().sum();
    }
    return ld;
}

Vector KroneckerCorrelation::apply_inverse(const Vector& x) const {
    std::vector<Matrix> inv;
    inv.reserve(factors_.size());
    for (const Matrix& f : factors_) {
        inv.push_back(Eigen::LDLT<Matrix>(f).solve(Matrix::Identity(f.rows(), f.cols())));
    }
    return kron_apply(inv, x);
}

Vector KroneckerCorrelation::eigenvalues() const {
    Vector vals = Vector::Ones(1);
    for (const Matrix& f : factors_) {
        SpdEigen eig = sym_eigen(SymMatrix::from(f, 1e-12));
        Vector next(vals.size() * eig.eigenvalues.size());
        int k = 0;
        for (int i = 0; i < vals.size(); ++i)
            for (int j = 0; j < eig.eigenvalues.size(); ++j) next(k++) = vals(i) * eig.eigenvalues(j);
        vals = std::move(next);
    }
    return vals;
}

KroneckerCorrelation theta_to_correlation(const DesignMatrix& dm, const Vector& theta) {
    std::vector<Matrix> logs = unpack_theta(dm, theta);
    std::vector<Matrix> factors;
    factors.reserve(logs.size());
    for (const Matrix& a : logs) {
        Matrix f = sym_exp(SymMatrix::from(a)).mat();
        Vector s = f.diagonal().array().rsqrt();
        Matrix c = s.asDiagonal() * f * s.asDiagonal();
        c.diagonal().setOnes();
        factors.push_back(std::move(c));
    }
    return KroneckerCorrelation(std::move(factors));
}

}  // namespace kroncov
