#include "kroncov/portfolio.hpp"

#include <cmath>

#include "kroncov/threading.hpp"

namespace kroncov {

MvpResult mvp_weights(const std::vector<Matrix>& factors, const Vector& d) {
    long n = 1;
    for (const Matrix& f : factors) n *= f.rows();
    if (d.size() != n) throw BadInput("mvp_weights: variance vector length mismatch");
    if ((d.array() <= 0.0).any()) throw BadInput("mvp_weights: variances must be positive");

    std::vector<Matrix> inv;
    inv.reserve(factors.size());
    for (const Matrix& f : factors) {
        SpdEigen eig = spd_eigen(SymMatrix::from(f, 1e-9));
        inv.push_back(eig.apply_function([](double l) { return 1.0 / l; }));
    }
    // Sigma^{-1} iota = D^{-1/2} Theta^{-1} D^{-1/2} iota
    Vector s = d.array().rsqrt();
    Vector u = kron_apply(inv, s);
    Vector sigma_inv_iota = s.cwiseProduct(u);
    double denom = sigma_inv_iota.sum();
    if (!(denom > 0.0)) throw NotPositiveDefinite(denom, "mvp normalization");
    MvpResult out;
    out.weights = sigma_inv_iota / denom;
    out.variance = 1.0 / denom;
    return out;
}

MvpResult mvp_weights_dense(const Matrix& sigma) {
    SpdEigen eig = spd_eigen(SymMatrix::from(sigma, 1e-8 * (1.0 + sigma.cwiseAbs().maxCoeff())));
    Vector iota = Vector::Ones(sigma.rows());
    Vector si = eig.Q * Vector((eig.Q.transpose() * iota).array() / eig.eigenvalues.array());
    double denom = si.sum();
    if (!(denom > 0.0)) throw NotPositiveDefinite(denom, "mvp normalization");
    MvpResult out;
    out.weights = si / denom;
    out.variance = 1.0 / denom;
    return out;
}

MvpResult mvp_weights_block(const KroneckerCorrelation& corr, const Vector& d, int data_dim) {
    const int n = corr.dim();
    if (data_dim == n) return mvp_weights(corr.factors(), d);
    if (data_dim > n || data_dim < 1) throw BadInput("mvp_weights_block: bad data dimension");
    Matrix theta = corr.full().topLeftCorner(data_dim, data_dim);
    Vector dh = d.head(data_dim);
    Vector s = dh.array().sqrt();
    Matrix sigma = s.asDiagonal() * theta * s.asDiagonal();
    return mvp_weights_dense(sigma);
}

Matrix sample_covariance(const ReturnPanel& window, bool* ridged) {
    PanelMoments mom = compute_moments(window);
    Matrix sigma = mom.sigma_tilde;
    if (ridged) *ridged = false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues()(0);
    double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (lmin <= kSpdTolerance * std::max(lmax, 0.0)) {
        double ridge = 1e-8 * sigma.trace() / sigma.rows();
        sigma.diagonal().array() += ridge;
        if (ridged) *ridged = true;
    }
    return sigma;
}

Matrix fit_kronecker_covariance(const ReturnPanel& window, const FactorizationSpec& spec,
                                Method method, Rng* pad_rng) {
    spec.validate();
    if (spec.data_dim() != window.n()) {
        throw BadInput("factorization data dimension does not match window width");
    }
    ReturnPanel padded = window;
    if (spec.pad > 0) {
        if (!pad_rng) throw BadInput("padded fit needs a random stream for pseudo-variables");
        Matrix xp(window.T(), window.n() + spec.pad);
        xp.leftCols(window.n()) = window.X;
        for (int t = 0; t < window.T(); ++t)
            for (int k = 0; k < spec.pad; ++k) xp(t, window.n() + k) = pad_rng->normal();
        padded.X = std::move(xp);
        padded.names.clear();
        if (window.known_mu || window.known_d) {
            throw BadInput("known moments are not supported with padding");
        }
    }
    DesignMatrix dm = DesignMatrix::build(spec);
    PanelMoments mom = compute_moments(padded);

    Vector theta;
    switch (method) {
        case Method::MD:
            theta = md_estimate(mom.m, dm).theta;
            break;
        case Method::OneStep: {
            ThetaEstimate md = md_estimate(mom.m, dm);
            theta = one_step(md, dm, padded).theta;
            break;
        }
        case Method::QMLE:
            theta = qmle(padded, dm).theta;
            break;
    }
    KroneckerCorrelation corr = theta_to_correlation(dm, theta);

    const int nd = window.n();
    Matrix theta_block = spec.pad > 0 ? Matrix(corr.full().topLeftCorner(nd, nd)) : corr.full();
    Vector s = mom.d.head(nd).array().sqrt();
    return Matrix(s.asDiagonal() * theta_block * s.asDiagonal());
}

namespace {

double realized_variance(const Matrix& eval_rows, const Vector& weights) {
    Vector r = eval_rows * weights;
    double mean = r.mean();
    return (r.array() - mean).square().sum() / r.size();
}

}  // namespace

BacktestReport rolling_backtest(const ReturnPanel& panel, const BacktestConfig& config) {
    panel.validate();
    if (config.horizon < 1) throw BadInput("horizon must be >= 1");
    if (config.window_m < 2) throw BadInput("window length must be >= 2");
    if (config.window_m + config.horizon > panel.T()) {
        throw WindowTooShort("window + horizon exceeds panel length");
    }
    for (const FactorizationSpec& s : config.specs) {
        s.validate();
        if (s.data_dim() != panel.n()) {
            throw BadInput("spec " + s.to_string() + " does not match panel width");
        }
    }

    const int windows = (panel.T() - config.window_m) / config.horizon;
    const int n_est = 1 + static_cast<int>(config.specs.size());

    BacktestReport report;
    report.windows = windows;
    report.window_m = config.window_m;
    report.horizon = config.horizon;
    report.estimator_names.push_back("sample");
    for (const FactorizationSpec& s : config.specs) report.estimator_names.push_back(s.to_string());
    report.outcomes.assign(windows, std::vector<WindowOutcome>(n_est));

    parallel_for(windows, config.threads, [&](int w) {
        const int start = w * config.horizon;
        Matrix est_rows = panel.X.middleRows(start, config.window_m);
        Matrix eval_rows = panel.X.middleRows(start + config.window_m, config.horizon);
        ReturnPanel window;
        window.X = est_rows;

        auto run = [&](int slot, const std::function<Matrix()>& fit) {
            WindowOutcome& out = report.outcomes[w][slot];
            try {
                Matrix sigma = fit();
                MvpResult mvp = mvp_weights_dense(sigma);
                out.realized_variance = realized_variance(eval_rows, mvp.weights);
                out.ok = true;
            } catch (const Error& e) {
                out.error = e.code();
            }
        };

        run(0, [&] {
            bool ridged = false;
            Matrix sigma = sample_covariance(window, &ridged);
            report.outcomes[w][0].ridged = ridged;
            return sigma;
        });
        for (std::size_t k = 0; k < config.specs.size(); ++k) {
            Rng pad_rng(config.seed, static_cast<std::uint64_t>(w) * config.specs.size() + k + 1);
            run(static_cast<int>(k) + 1, [&] {
                return fit_kronecker_covariance(window, config.specs[k], config.method, &pad_rng);
            });
        }
    });

    for (std::size_t k = 0; k < config.specs.size(); ++k) {
        EstimatorSummary s;
        s.name = report.estimator_names[k + 1];
        double wins = 0.0;
        double sum_kron = 0.0, sum_samp = 0.0;
        int used = 0;
        for (int w = 0; w < windows; ++w) {
            const WindowOutcome& samp = report.outcomes[w][0];
            const WindowOutcome& kron = report.outcomes[w][k + 1];
            if (!kron.ok) {
                ++s.failures;
                continue;
            }
            if (!samp.ok) continue;
            ++used;
            if (kron.realized_variance < samp.realized_variance) {
                wins += 1.0;
            } else if (kron.realized_variance == samp.realized_variance) {
                wins += 0.5;  // tie rule
            }
            sum_kron += kron.realized_variance;
            sum_samp += samp.realized_variance;
        }
        s.windows_used = used;
        if (used > 0) {
            s.prop = wins / used;
            s.impr = sum_samp > 0.0 ? 100.0 * (1.0 - sum_kron / sum_samp) : 0.0;
        } else {
            s.prop = 0.5;
        }
        report.summaries.push_back(std::move(s));
    }
    return report;
}

}  // namespace kroncov
