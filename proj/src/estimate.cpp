#include "kroncov/estimate.hpp"

#include <cmath>
#include <limits>

namespace kroncov {

const char* method_name(Method m) {
    switch (m) {
        case Method::MD: return "md";
        case Method::OneStep: return "onestep";
        case Method::QMLE: return "qmle";
    }
    return "?";
}

namespace {

// Eigen structure of Omega(theta) assembled from the per-factor logs:
// Q = Q_1 (x) ... (x) Q_v and omega = Kronecker sums of factor eigenvalues.
struct FactorEigen {
    std::vector<Matrix> logs;
    std::vector<Matrix> q;        // factor eigenvectors
    std::vector<Matrix> qt;       // transposes, for conjugating into the basis
    std::vector<Matrix> inv;      // exp(-A_j) per factor
    Vector omega;                 // length n, Kronecker order
    double tau = 0.0;
    int n = 0;
};

FactorEigen make_factor_eigen(const DesignMatrix& dm, const Vector& theta) {
    FactorEigen fe;
    fe.logs = unpack_theta(dm, theta);
    fe.tau = theta(0);
    fe.n = dm.n();
    fe.omega = Vector::Zero(1);
    for (const Matrix& a : fe.logs) {
        SpdEigen eig = sym_eigen(SymMatrix::from(a));
        fe.q.push_back(eig.Q);
        fe.qt.push_back(eig.Q.transpose());
        fe.inv.push_back(eig.apply_function([](double w) { return std::exp(-w); }));
        Vector next(fe.omega.size() * eig.eigenvalues.size());
        int k = 0;
        for (int i = 0; i < fe.omega.size(); ++i)
            for (int j = 0; j < eig.eigenvalues.size(); ++j)
                next(k++) = fe.omega(i) + eig.eigenvalues(j);
        fe.omega = std::move(next);
    }
    return fe;
}

Matrix apply_to_cols(const std::vector<Matrix>& factors, const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (int c = 0; c < x.cols(); ++c) out.col(c) = kron_apply(factors, x.col(c));
    return out;
}

// (Q_1 (x) ... (x) Q_v)-sandwich of a square matrix: Q' X Q when `into`
// is true, Q X Q' otherwise.
Matrix kron_sandwich(const FactorEigen& fe, const Matrix& x, bool into) {
    const std::vector<Matrix>& f = into ? fe.qt : fe.q;
    Matrix z = apply_to_cols(f, x);
    return apply_to_cols(f, z.transpose()).transpose();
}

// Theta^{-1} X Theta^{-1} through the factor inverses.
Matrix inv_sandwich(const FactorEigen& fe, const Matrix& x) {
    Matrix z = apply_to_cols(fe.inv, x);
    return apply_to_cols(fe.inv, z.transpose()).transpose();
}

double trace_inv_times(const FactorEigen& fe, const Matrix& m_tilde) {
    double tr = 0.0;
    for (int c = 0; c < m_tilde.cols(); ++c) tr += kron_apply(fe.inv, m_tilde.col(c))(c);
    return tr;
}

// Columns of E as symmetric matrices (unvech of each column).
Matrix design_column_matrix(const DesignMatrix& dm, int k) {
    const int n = dm.n();
    Matrix s = Matrix::Zero(n, n);
    for (SparseMatrix::InnerIterator it(dm.E, k); it; ++it) {
        // invert vech index: find (i, j) for this row
        int idx = static_cast<int>(it.row());
        int j = 0;
        while (idx >= n - j) {
            idx -= n - j;
            ++j;
        }
        int i = j + idx;
        s(i, j) = it.value();
        s(j, i) = it.value();
    }
    return s;
}

Vector et_dnt_vec(const DesignMatrix& dm, const Matrix& w) {
    const int n = dm.n();
    Eigen::Map<const Vector> u(w.data(), static_cast<long>(n) * n);
    Vector vh = apply_duplication_t(u, n);
    return dm.E.transpose() * vh;
}

double max_abs_factor_correlation(const FactorEigen& fe) {
    double worst = 0.0;
    for (const Matrix& a : fe.logs) {
        Matrix f = sym_exp(SymMatrix::from(a)).mat();
        Vector s = f.diagonal().array().rsqrt();
        Matrix c = s.asDiagonal() * f * s.asDiagonal();
        for (int i = 1; i < c.rows(); ++i)
            for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(c(i, j)));
    }
    return worst;
}

}  // namespace

ThetaEstimate md_estimate(const SymMatrix& m, const DesignMatrix& dm, const WeightSpec& w) {
    Vector y = vech(spd_log(m).mat());
    const int q = dm.q();
    Matrix lhs(q, q);
    Vector rhs(q);
    if (w.kind == WeightSpec::Kind::Identity) {
        lhs = (dm.E.transpose() * dm.E).toDense();
        rhs = dm.E.transpose() * y;
    } else {
        if (w.W.rows() != y.size() || w.W.cols() != y.size()) {
            throw BadInput("weight matrix has wrong dimensions");
        }
        Matrix ew = dm.E.transpose() * w.W;  // q x m
        lhs = ew * dm.E;
        rhs = ew * y;
    }
    Eigen::LDLT<Matrix> ldlt(lhs);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw SingularWeight("E'WE is numerically singular");
    }
    ThetaEstimate est;
    est.theta = ldlt.solve(rhs);
    est.method = Method::MD;
    est.weight = w.kind;
    return est;
}

double gaussian_loglik(const DesignMatrix& dm, const Vector& theta, const PanelMoments& mom,
                       int n_obs) {
    FactorEigen fe = make_factor_eigen(dm, theta);
    const double n = static_cast<double>(fe.n);
    double logdet_d = mom.d.array().log().sum();
    double quad = trace_inv_times(fe, mom.m.mat());
    constexpr double kLog2Pi = 1.8378770664093454836;
    return -0.5 * n_obs * (n * kLog2Pi + logdet_d + n * fe.tau + quad);
}

double gaussian_loglik(const DesignMatrix& dm, const Vector& theta, const ReturnPanel& panel) {
    PanelMoments mom = compute_moments(panel);
    return gaussian_loglik(dm, theta, mom, mom.T);
}

Vector score_from_moments(const DesignMatrix& dm, const Vector& theta, const Matrix& m_tilde,
                          int n_obs) {
    FactorEigen fe = make_factor_eigen(dm, theta);
    // Psi_1 vec(Theta^{-1} M Theta^{-1} - Theta^{-1}); the second term is
    // exactly vec(I) after the kernel, so only the first needs conjugation.
    Matrix x = inv_sandwich(fe, m_tilde);
    Matrix y = kron_sandwich(fe, x, true);
    const int n = fe.n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) y(i, j) *= dd_exp_entry(fe.omega(i), fe.omega(j));
    Matrix w = kron_sandwich(fe, y, false);
    w.diagonal().array() -= 1.0;
    return 0.5 * n_obs * et_dnt_vec(dm, w);
}

Vector score(const DesignMatrix& dm, const Vector& theta, const ReturnPanel& panel) {
    PanelMoments mom = compute_moments(panel);
    return score_from_moments(dm, theta, mom.m.mat(), mom.T);
}

Matrix expected_hessian_hat(const DesignMatrix& dm, const SymMatrix& m) {
    SpdEigen eig = spd_eigen(m);
    const int n = dm.n();
    const int q = dm.q();
    // Psi_1 (M^{-1} (x) M^{-1}) Psi_1 is diagonal in the eigenbasis of M with
    // pair entries k_ij^2 / (lambda_i lambda_j).
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double k = dd_exp_entry(std::log(eig.eigenvalues(i)), std::log(eig.eigenvalues(j)));
            g(i, j) = k * k / (eig.eigenvalues(i) * eig.eigenvalues(j));
        }
    }
    Matrix ups(q, q);
    for (int k = 0; k < q; ++k) {
        Matrix s = design_column_matrix(dm, k);
        Matrix inner = eig.Q.transpose() * s * eig.Q;
        inner.array() *= g.array();
        Matrix w = eig.Q * inner * eig.Q.transpose();
        ups.col(k) = -0.5 * et_dnt_vec(dm, w);
    }
    return 0.5 * (ups + ups.transpose());
}

Matrix expected_hessian_at(const DesignMatrix& dm, const Vector& theta) {
    FactorEigen fe = make_factor_eigen(dm, theta);
    const int n = fe.n;
    const int q = dm.q();
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double k = dd_exp_entry(fe.omega(i), fe.omega(j));
            g(i, j) = k * k * std::exp(-fe.omega(i) - fe.omega(j));
        }
    }
    Matrix ups(q, q);
    for (int k = 0; k < q; ++k) {
        Matrix s = design_column_matrix(dm, k);
        Matrix inner = kron_sandwich(fe, s, true);
        inner.array() *= g.array();
        Matrix w = kron_sandwich(fe, inner, false);
        ups.col(k) = -0.5 * et_dnt_vec(dm, w);
    }
    return 0.5 * (ups + ups.transpose());
}

namespace {

// 32-point Gauss-Legendre nodes/weights on [0, 1].
void gauss_legendre_01(std::vector<double>& nodes, std::vector<double>& weights) {
    constexpr int kN = 32;
    nodes.resize(kN);
    weights.resize(kN);
    for (int i = 0; i < kN; ++i) {
        // Newton iteration on Legendre P_32 from the Chebyshev initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (kN + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= kN; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = kN * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], ascending
        weights[i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
}

}  // namespace

Matrix full_hessian(const DesignMatrix& dm, const Vector& theta, const ReturnPanel& panel) {
    const int n = dm.n();
    if (n > kDenseKernelLimit) {
        throw DimensionOverflow("full_hessian requires n <= " + std::to_string(kDenseKernelLimit));
    }
    PanelMoments mom = compute_moments(panel);
    const double t_obs = static_cast<double>(mom.T);
    const int q = dm.q();

    FactorEigen fe = make_factor_eigen(dm, theta);
    Matrix omega_full = Matrix::Zero(n, n);
    {
        long pre = 1, post = n;
        for (const Matrix& a : fe.logs) {
            const int nj = static_cast<int>(a.rows());
            post /= nj;
            for (long p = 0; p < pre; ++p)
                for (int r = 0; r < nj; ++r)
                    for (int c = 0; c < nj; ++c)
                        for (long qq = 0; qq < post; ++qq)
                            omega_full((p * nj + r) * post + qq, (p * nj + c) * post + qq) +=
                                a(r, c);
            pre *= nj;
        }
    }
    SpdEigen oeig = sym_eigen(SymMatrix::from(omega_full, 1e-12));
    const Vector& w = oeig.eigenvalues;
    const Matrix& qmat = oeig.Q;

    auto kernel_apply = [&](double scale, const Matrix& x) {
        // Psi_1 of (scale * Omega) applied to x
        Matrix inner = qmat.transpose() * x * qmat;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) inner(i, j) *= dd_exp_entry(scale * w(i), scale * w(j));
        return Matrix(qmat * inner * qmat.transpose());
    };
    auto exp_scaled = [&](double scale) {
        Vector ev = (scale * w.array()).exp();
        return Matrix(qmat * ev.asDiagonal() * qmat.transpose());
    };

    Matrix theta_inv = exp_scaled(-1.0);
    Matrix a_mat = theta_inv * mom.m.mat();            // Theta^{-1} M
    Matrix phi = a_mat * theta_inv - theta_inv;        // matrix form of Psi_2

    std::vector<Matrix> s_cols(q);
    for (int k = 0; k < q; ++k) s_cols[k] = design_column_matrix(dm, k);

    Matrix hess = Matrix::Zero(q, q);
    // First term: -T/2 E'Dn' Psi_1 [(A (x) I) + (I (x) A) - I] (Th^{-1} (x) Th^{-1}) Psi_1 Dn E
    for (int k = 0; k < q; ++k) {
        Matrix w1 = kernel_apply(1.0, s_cols[k]);
        Matrix w2 = theta_inv * w1 * theta_inv;
        Matrix w3 = a_mat * w2 + w2 * a_mat.transpose() - w2;
        Matrix w4 = kernel_apply(1.0, w3);
        hess.col(k) = -0.5 * t_obs * et_dnt_vec(dm, w4);
    }

    // Remaining terms: quadrature in t over the nested exponential integrals.
    std::vector<double> nodes, weights;
    gauss_legendre_01(nodes, weights);
    for (std::size_t m_i = 0; m_i < nodes.size(); ++m_i) {
        double t = nodes[m_i];
        double wt = weights[m_i];
        Matrix b = exp_scaled(1.0 - t);
        Matrix c = exp_scaled(t);
        for (int k = 0; k < q; ++k) {
            Matrix wk = kernel_apply(t, s_cols[k]);
            Matrix vk = kernel_apply(1.0 - t, s_cols[k]);
            Vector col2 = 0.5 * t_obs * t * wt * et_dnt_vec(dm, b * phi * wk);
            Vector col3 = 0.5 * t_obs * (1.0 - t) * wt * et_dnt_vec(dm, vk * phi * c);
            hess.col(k) += col2 + col3;
        }
    }
    return hess;
}

ThetaEstimate one_step(const ThetaEstimate& init, const DesignMatrix& dm,
                       const ReturnPanel& panel) {
    PanelMoments mom = compute_moments(panel);
    Matrix ups = expected_hessian_hat(dm, mom.m);
    Vector g = score_from_moments(dm, init.theta, mom.m.mat(), mom.T) / mom.T;
    Eigen::LDLT<Matrix> ldlt(Matrix(-ups));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw SingularHessian("expected Hessian is not invertible");
    }
    ThetaEstimate out;
    out.theta = init.theta + ldlt.solve(g);
    out.method = Method::OneStep;
    out.weight = init.weight;
    out.iterations = 1;
    out.converged = true;
    out.loglik = gaussian_loglik(dm, out.theta, mom, mom.T);
    return out;
}

ThetaEstimate qmle(const ReturnPanel& panel, const DesignMatrix& dm, std::optional<Vector> init,
                   QmleOptions opts) {
    PanelMoments mom = compute_moments(panel);
    Vector theta;
    if (init) {
        theta = *init;
        if (theta.size() != dm.q()) throw BadInput("qmle init has wrong length");
    } else {
        try {
            theta = md_estimate(mom.m, dm).theta;
        } catch (const NotPositiveDefinite&) {
            theta = Vector::Zero(dm.q());  // log M_T unavailable; start flat
        }
    }

    ThetaEstimate out;
    out.method = Method::QMLE;
    double ll = gaussian_loglik(dm, theta, mom, mom.T);
    bool converged = false;
    int iter = 0;
    const double theta_cap = std::atanh(opts.rho_cap);

    auto inside_box = [&](const Vector& th) {
        if (dm.spec.is_binary()) {
            for (int j = 1; j < th.size(); ++j)
                if (std::abs(th(j)) >= theta_cap) return false;
            return true;
        }
        FactorEigen fe = make_factor_eigen(dm, th);
        return max_abs_factor_correlation(fe) < opts.rho_cap;
    };

    int stalls = 0;  // consecutive steps with no representable loglik gain
    for (; iter < opts.max_iter; ++iter) {
        Vector g = score_from_moments(dm, theta, mom.m.mat(), mom.T) / mom.T;
        if (g.cwiseAbs().maxCoeff() < opts.tol) {
            converged = true;
            break;
        }
        Matrix ups = expected_hessian_at(dm, theta);
        Eigen::LDLT<Matrix> ldlt(Matrix(-ups));
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw SingularHessian("expected Hessian is not invertible at iterate");
        }
        Vector dir = ldlt.solve(g);

        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h < 60; ++h) {
            Vector cand = theta + step * dir;
            if (!inside_box(cand)) {
                step *= 0.5;
                continue;
            }
            double cand_ll = gaussian_loglik(dm, cand, mom, mom.T);
            // Near the optimum the gain drops below double resolution while
            // the Newton direction still contracts the score, so equality is
            // accepted (bounded by the stall counter).
            if (cand_ll >= ll) {
                stalls = cand_ll > ll ? 0 : stalls + 1;
                theta = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || stalls >= 3) break;
    }
    if (!converged) {
        Vector g = score_from_moments(dm, theta, mom.m.mat(), mom.T) / mom.T;
        converged = g.cwiseAbs().maxCoeff() < opts.tol;
    }

    out.theta = theta;
    out.loglik = ll;
    out.iterations = iter;
    out.converged = converged;
    return out;
}

}  // namespace kroncov
