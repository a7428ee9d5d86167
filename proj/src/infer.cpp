#include "kroncov/infer.hpp"

#include <cmath>
#include <functional>

namespace kroncov {

const char* variance_mode_name(VarianceMode m) {
    return m == VarianceMode::Empirical ? "empirical" : "gaussian";
}

namespace {

// Rows of B = (E'WE)^{-1} E'W Dn+ H (D^{-1/2} (x) D^{-1/2}) as symmetric
// n x n matrices X_r, so that (B vec(zz'))_r = z' X_r z.
std::vector<Matrix> sandwich_rows(const PanelMoments& mom, const DesignMatrix& dm,
                                  const WeightSpec& w, const SpdEigen& eig) {
    const int n = dm.n();
    const int q = dm.q();
    const int m = vech_size(n);

    // a_r = rows of (E'WE)^{-1} E'W
    Matrix ew;  // q x m
    if (w.kind == WeightSpec::Kind::Identity) {
        ew = Matrix(dm.E.transpose());
    } else {
        if (w.W.rows() != m || w.W.cols() != m) throw BadInput("weight matrix has wrong size");
        ew = dm.E.transpose() * w.W;
    }
    Eigen::LDLT<Matrix> ldlt(Matrix(ew * dm.E));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw SingularWeight("E'WE is numerically singular");
    }
    Matrix a = ldlt.solve(ew);  // q x m

    Matrix hk(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            hk(i, j) = dd_log_entry(eig.eigenvalues(i), eig.eigenvalues(j));

    Vector dscale = mom.d.array().rsqrt();
    std::vector<Matrix> rows(q);
    for (int r = 0; r < q; ++r) {
        Vector s = apply_pinv_duplication_t(a.row(r).transpose(), n);
        Eigen::Map<const Matrix> sm(s.data(), n, n);
        Matrix inner = eig.Q.transpose() * sm * eig.Q;
        inner.array() *= hk.array();
        Matrix x = eig.Q * inner * eig.Q.transpose();
        rows[r] = dscale.asDiagonal() * x * dscale.asDiagonal();
    }
    return rows;
}

Vector functional_direction(const Vector& theta, const std::function<double(double)>& fprime) {
    const int v = static_cast<int>(theta.size()) - 1;
    Vector c = Vector::Zero(v + 1);
    double norm2 = 0.0;
    for (int j = 0; j < v; ++j) {
        double fp = fprime(theta(j + 1));
        c(j + 1) = fp;
        norm2 += fp * fp;
    }
    if (norm2 < 1e-280) throw DegenerateDirection("all functional derivatives vanish");
    c /= std::sqrt(norm2);
    return c;
}

double quad_form(const JMatrix& j, const Vector& c) { return c.dot(j.J * c); }

void require_binary(const DesignMatrix& dm, const char* what) {
    if (!dm.spec.is_binary()) {
        throw BadInput(std::string(what) + " requires an all-binary factorization");
    }
}

}  // namespace

JMatrix jhat(const ReturnPanel& panel, const SymMatrix& m, const DesignMatrix& dm,
             const WeightSpec& w, VarianceMode mode) {
    PanelMoments mom = compute_moments(panel);
    SpdEigen eig = spd_eigen(m);
    std::vector<Matrix> rows = sandwich_rows(mom, dm, w, eig);
    const int q = dm.q();
    Matrix j = Matrix::Zero(q, q);

    if (mode == VarianceMode::Gaussian) {
        // J = 2 B (M (x) M) B' => entries 2 tr(X_r M X_s M)
        std::vector<Matrix> mxm(q);
        for (int s = 0; s < q; ++s) mxm[s] = m.mat() * rows[s] * m.mat();
        for (int r = 0; r < q; ++r)
            for (int s = 0; s <= r; ++s)
                j(r, s) = j(s, r) = 2.0 * rows[r].cwiseProduct(mxm[s]).sum();
        return JMatrix{std::move(j), mode};
    }

    // Streaming fourth-moment accumulation: J = (1/T) sum g_t g_t' - g_bar g_bar'
    // with g_t[r] = z_t' X_r z_t, z_t = x_t - mu.
    Vector g(q);
    Vector gbar = Vector::Zero(q);
    Matrix gsq = Matrix::Zero(q, q);
    const int t_obs = mom.T;
    for (int t = 0; t < t_obs; ++t) {
        Vector z = panel.X.row(t).transpose() - mom.mu;
        for (int r = 0; r < q; ++r) g(r) = z.dot(rows[r] * z);
        gbar += g;
        gsq.selfadjointView<Eigen::Lower>().rankUpdate(g);
    }
    gbar /= t_obs;
    j = Matrix(gsq.selfadjointView<Eigen::Lower>()) / t_obs - gbar * gbar.transpose();
    j = 0.5 * (j + j.transpose());
    return JMatrix{std::move(j), mode};
}

TestResult wald_test(const Matrix& a_mat, const Vector& a, const Vector& theta, const JMatrix& j,
                     int n_obs) {
    const int k = static_cast<int>(a_mat.cols());
    if (a_mat.rows() != theta.size() || a.size() != k) {
        throw BadInput("wald_test: restriction dimensions do not match");
    }
    Vector diff = a_mat.transpose() * theta - a;
    Matrix v = a_mat.transpose() * j.J * a_mat;
    Eigen::SelfAdjointEigenSolver<Matrix> es(v);
    if (es.info() != Eigen::Success ||
        es.eigenvalues()(0) <= 1e-12 * std::max(es.eigenvalues()(k - 1), 0.0)) {
        throw SingularVariance("A' J A is numerically singular");
    }
    TestResult out;
    Vector rotated = es.eigenvectors().transpose() * diff;
    out.statistic = n_obs * (rotated.array().square() / es.eigenvalues().array()).sum();
    out.df = k;
    out.p_value = chi2_upper_tail(out.statistic, k);
    out.rejected_5pct = out.p_value < 0.05;
    out.normalized = (out.statistic - k) / std::sqrt(2.0 * k);
    return out;
}

namespace {

// S = Dn+ H (D (x) D)^{-1/2} V (D (x) D)^{-1/2} H Dn+' for the given mode.
Matrix build_s_hat(const ReturnPanel& panel, const PanelMoments& mom, const SpdEigen& eig,
                   VarianceMode mode) {
    const int n = static_cast<int>(mom.d.size());
    const int m = vech_size(n);
    Matrix hk(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            hk(i, j) = dd_log_entry(eig.eigenvalues(i), eig.eigenvalues(j));

    if (mode == VarianceMode::Gaussian) {
        std::vector<Matrix> xs(m);
        for (int r = 0; r < m; ++r) {
            Vector e = Vector::Zero(m);
            e(r) = 1.0;
            Vector s = apply_pinv_duplication_t(e, n);
            Eigen::Map<const Matrix> sm(s.data(), n, n);
            Matrix inner = eig.Q.transpose() * sm * eig.Q;
            inner.array() *= hk.array();
            xs[r] = eig.Q * inner * eig.Q.transpose();
        }
        Matrix s_hat(m, m);
        std::vector<Matrix> mid(m);
        for (int c = 0; c < m; ++c) mid[c] = mom.m.mat() * xs[c] * mom.m.mat();
        for (int r = 0; r < m; ++r)
            for (int c = 0; c <= r; ++c)
                s_hat(r, c) = s_hat(c, r) = 2.0 * xs[r].cwiseProduct(mid[c]).sum();
        return s_hat;
    }

    Vector dscale = mom.d.array().rsqrt();
    Vector hbar = Vector::Zero(m);
    Matrix hsq = Matrix::Zero(m, m);
    Vector h(m);
    for (int t = 0; t < mom.T; ++t) {
        Vector z = (panel.X.row(t).transpose() - mom.mu).cwiseProduct(dscale);
        Vector u = eig.Q.transpose() * z;
        Matrix a = hk.cwiseProduct(u * u.transpose());
        Matrix x = eig.Q * a * eig.Q.transpose();
        for (int jj = 0; jj < n; ++jj) {
            for (int ii = jj; ii < n; ++ii) {
                double val = x(ii, jj);
                if (ii != jj) val = 0.5 * (x(ii, jj) + x(jj, ii));
                h(vech_index(n, ii, jj)) = val;
            }
        }
        hbar += h;
        hsq.selfadjointView<Eigen::Lower>().rankUpdate(h);
    }
    hbar /= mom.T;
    Matrix s_hat = Matrix(hsq.selfadjointView<Eigen::Lower>()) / mom.T - hbar * hbar.transpose();
    return 0.5 * (s_hat + s_hat.transpose());
}

struct SInverse {
    Eigen::LDLT<Matrix> ldlt;
    double condition = 0.0;
    bool warning = false;
};

SInverse factor_s_hat(const Matrix& s_hat) {
    SInverse out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(s_hat, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues()(0);
    double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (lmin <= 0.0 || lmax / lmin > 1e14) {
        throw SingularS("S is numerically singular (T too small for n(n+1)/2 moments)");
    }
    out.condition = lmax / lmin;
    out.warning = out.condition > 1e10;
    out.ldlt.compute(s_hat);
    if (out.ldlt.info() != Eigen::Success) throw SingularS("S factorization failed");
    return out;
}

}  // namespace

WeightSpec make_optimal_weight(const ReturnPanel& panel, const DesignMatrix& dm,
                               VarianceMode mode) {
    const int n = dm.n();
    if (n > kDenseKernelLimit) {
        throw DimensionOverflow("optimal weight requires n <= " +
                                std::to_string(kDenseKernelLimit));
    }
    PanelMoments mom = compute_moments(panel);
    SpdEigen eig = spd_eigen(mom.m);
    Matrix s_hat = build_s_hat(panel, mom, eig, mode);
    SInverse si = factor_s_hat(s_hat);
    WeightSpec w;
    w.kind = WeightSpec::Kind::FeasibleOptimal;
    w.W = si.ldlt.solve(Matrix::Identity(s_hat.rows(), s_hat.cols()));
    return w;
}

OveridResult overid_test(const ReturnPanel& panel, const DesignMatrix& dm, VarianceMode mode) {
    const int n = dm.n();
    if (n > kOveridDimLimit) {
        throw DimensionOverflow("overid_test requires n <= " + std::to_string(kOveridDimLimit));
    }
    PanelMoments mom = compute_moments(panel);
    SpdEigen eig = spd_eigen(mom.m);
    const int m = vech_size(n);
    const int q = dm.q();
    if (m <= q) throw BadInput("model is exactly identified; no over-identification to test");

    Matrix s_hat = build_s_hat(panel, mom, eig, mode);
    SInverse si = factor_s_hat(s_hat);

    Vector y = vech(eig.apply_function([](double x) { return std::log(x); }));
    Matrix e_dense = Matrix(dm.E);
    Matrix sie = si.ldlt.solve(e_dense);                 // S^{-1} E
    Matrix lhs = e_dense.transpose() * sie;              // E' S^{-1} E
    Eigen::LDLT<Matrix> small(lhs);
    if (small.info() != Eigen::Success || !small.isPositive()) {
        throw SingularWeight("E' S^{-1} E is numerically singular");
    }
    Vector theta = small.solve(sie.transpose() * y);
    Vector g = y - e_dense * theta;

    OveridResult out;
    out.theta = theta;
    out.s_condition = si.condition;
    out.condition_warning = si.warning;
    out.test.statistic = mom.T * g.dot(si.ldlt.solve(g));
    out.test.df = m - q;
    out.test.p_value = chi2_upper_tail(out.test.statistic, out.test.df);
    out.test.rejected_5pct = out.test.p_value < 0.05;
    out.test.normalized = (out.test.statistic - out.test.df) / std::sqrt(2.0 * out.test.df);
    return out;
}

SpectralSummary spectral_params(const DesignMatrix& dm, const Vector& theta, const JMatrix& j,
                                int n_obs) {
    require_binary(dm, "spectral_params");
    const int v = dm.spec.v();
    SpectralSummary out;
    out.mean.value = theta(0);
    Vector e1 = Vector::Zero(v + 1);
    e1(0) = 1.0;
    out.mean.se = std::sqrt(std::max(quad_form(j, e1), 0.0) / n_obs);

    double ss = theta.tail(v).squaredNorm();
    out.variance.value = ss;
    Vector c = functional_direction(theta, [](double x) { return x; });
    out.variance.se = 2.0 * std::sqrt(std::max(quad_form(j, c), 0.0) * ss / n_obs);
    return out;
}

ExtremeLogEigs extreme_log_eigs(const DesignMatrix& dm, const Vector& theta, const JMatrix& j,
                                int n_obs) {
    require_binary(dm, "extreme_log_eigs");
    const int v = dm.spec.v();
    ExtremeLogEigs out;

    // Work with |theta_{j+1}|: flipping a factor correlation's sign permutes
    // the spectrum, so the extremes depend on the absolute values; the chain
    // rule picks up the sign.
    auto f1 = [](double x) { return std::log(2.0) + 2.0 * x - std::log(std::exp(2.0 * x) + 1.0); };
    auto f2 = [](double x) { return std::log(2.0) - std::log(std::exp(2.0 * x) + 1.0); };
    auto f1p = [](double x) { return 2.0 / (1.0 + std::exp(2.0 * x)); };
    auto f2p = [](double x) { return -2.0 * std::exp(2.0 * x) / (1.0 + std::exp(2.0 * x)); };

    double wmax = 0.0, wmin = 0.0;
    for (int jj = 0; jj < v; ++jj) {
        double th = theta(jj + 1);
        if (th < 0.0) out.abs_correction = true;
        wmax += f1(std::abs(th));
        wmin += f2(std::abs(th));
    }
    out.omega_max.value = wmax;
    out.omega_min.value = wmin;

    auto direction = [&](const std::function<double(double)>& fp) {
        Vector c = Vector::Zero(v + 1);
        double norm2 = 0.0;
        for (int jj = 0; jj < v; ++jj) {
            double th = theta(jj + 1);
            double sign = th < 0.0 ? -1.0 : 1.0;
            double val = sign * fp(std::abs(th));
            c(jj + 1) = val;
            norm2 += val * val;
        }
        if (norm2 < 1e-280) throw DegenerateDirection("extreme-eigenvalue direction vanishes");
        double nrm = std::sqrt(norm2);
        c /= nrm;
        return std::make_pair(c, nrm);
    };
    auto [cu, nu] = direction(f1p);
    out.omega_max.se = nu * std::sqrt(std::max(quad_form(j, cu), 0.0) / n_obs);
    auto [cl, nl] = direction(f2p);
    out.omega_min.se = nl * std::sqrt(std::max(quad_form(j, cl), 0.0) / n_obs);
    return out;
}

IntervalEstimate mvp_log_variance(const DesignMatrix& dm, const Vector& theta, const JMatrix& j,
                                  int n_obs) {
    require_binary(dm, "mvp_log_variance");
    const int v = dm.spec.v();
    auto f3 = [](double x) { return -std::log1p(std::exp(-2.0 * x)); };
    auto f3p = [](double x) { return 2.0 * std::exp(-2.0 * x) / (1.0 + std::exp(-2.0 * x)); };

    IntervalEstimate out;
    for (int jj = 0; jj < v; ++jj) out.value += f3(theta(jj + 1));
    Vector c = functional_direction(theta, f3p);
    double norm = 0.0;
    for (int jj = 0; jj < v; ++jj) norm += f3p(theta(jj + 1)) * f3p(theta(jj + 1));
    out.se = std::sqrt(norm) * std::sqrt(std::max(quad_form(j, c), 0.0) / n_obs);
    return out;
}

// Regularized incomplete gamma Q(a, x) by series / continued fraction.
namespace {

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // P(a,x) series, return 1 - P
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        double lng = std::lgamma(a);
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lng);
    }
    // Continued fraction for Q(a,x) (modified Lentz)
    double lng = std::lgamma(a);
    double b = x + 1.0 - a;
    double c = 1e308;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - lng) * h;
}

}  // namespace

double chi2_upper_tail(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace kroncov
