#include "kroncov/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kroncov/manifest.hpp"
#include "kroncov/portfolio.hpp"
#include "kroncov/threading.hpp"

namespace kroncov {

using nlohmann::json;

const char* dgp_name(Dgp d) { return d == Dgp::KroneckerTrue ? "kronecker" : "lognormal"; }

std::vector<Matrix> kronecker_factors_from_rhos(const Vector& rho) {
    std::vector<Matrix> out;
    out.reserve(rho.size());
    for (int j = 0; j < rho.size(); ++j) {
        Matrix f(2, 2);
        f << 1.0, rho(j), rho(j), 1.0;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Matrix> gen_kronecker_factors(int v, Rng& rng) {
    Vector rho(v);
    for (int j = 0; j < v; ++j) rho(j) = rng.uniform();
    return kronecker_factors_from_rhos(rho);
}

Vector gen_lognormal_diag(int n, double alpha2, Rng& rng) {
    if (!(alpha2 > 0.0)) throw BadInput("alpha2 must be positive");
    double s2 = std::log1p(alpha2);
    double m = -0.5 * s2;
    double s = std::sqrt(s2);
    Vector d(n);
    for (int i = 0; i < n; ++i) d(i) = std::exp(m + s * rng.normal());
    return d;
}

double prial(const Matrix& estimate, const Matrix& sample, const Matrix& truth, bool inverse) {
    auto loss = [&](const Matrix& a) {
        if (!inverse) return (a - truth).squaredNorm();
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
        if (es.eigenvalues()(0) <= kSpdTolerance * std::max(lmax, 0.0)) {
            throw SingularSampleCov("matrix not invertible in precision loss");
        }
        Matrix inv = es.eigenvectors() *
                     Vector(es.eigenvalues().cwiseInverse()).asDiagonal() *
                     es.eigenvectors().transpose();
        Matrix id = Matrix::Identity(a.rows(), a.cols());
        return (inv - Eigen::LDLT<Matrix>(truth).solve(id)).squaredNorm();
    };
    double num = loss(estimate);
    double den = loss(sample);
    if (den == 0.0) return num == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return 1.0 - num / den;
}

double variance_ratio(const Matrix& estimate, const Matrix& sample, const Matrix& holdout) {
    MvpResult w_est = mvp_weights_dense(estimate);
    MvpResult w_samp = mvp_weights_dense(sample);
    Vector r_est = holdout * w_est.weights;
    Vector r_samp = holdout * w_samp.weights;
    auto var = [](const Vector& r) {
        double m = r.mean();
        return (r.array() - m).square().sum() / r.size();
    };
    double vs = var(r_samp);
    if (vs == 0.0) return 1.0;
    return var(r_est) / vs;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
    return 0.5 * (values[mid - 1] + hi);
}

namespace {

int binary_exponent(int n) {
    int v = 0;
    int m = n;
    while (m > 1 && m % 2 == 0) {
        m /= 2;
        ++v;
    }
    if (m != 1) throw BadInput("simulation DGPs require n to be a power of 2");
    return v;
}

std::string config_digest(const SimConfig& c) {
    std::ostringstream os;
    os << dgp_name(c.dgp) << '|' << c.n << '|' << c.T << '|' << c.seed << '|' << c.alpha2 << '|'
       << method_name(c.estimator);
    return sha256_hex(os.str()).substr(0, 16);
}

Matrix draw_panel(const std::vector<Matrix>& factor_sqrts, int t_obs, int n, Rng& rng) {
    Matrix x(t_obs, n);
    Vector z(n);
    for (int t = 0; t < t_obs; ++t) {
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        x.row(t) = kron_apply(factor_sqrts, z).transpose();
    }
    return x;
}

RepRecord run_one_rep(const SimConfig& c, const DesignMatrix& dm, int rep) {
    RepRecord rec;
    rec.rep = rep;
    Rng rng(c.seed, static_cast<std::uint64_t>(rep) + 1);
    try {
        Matrix sigma_true;
        Matrix x;
        Matrix x_oos;
        if (c.dgp == Dgp::KroneckerTrue) {
            std::vector<Matrix> factors = gen_kronecker_factors(dm.spec.v(), rng);
            sigma_true = kron_chain(factors);
            std::vector<Matrix> sqrts;
            sqrts.reserve(factors.size());
            for (const Matrix& f : factors) {
                SpdEigen eig = spd_eigen(SymMatrix::from(f));
                sqrts.push_back(eig.apply_function([](double l) { return std::sqrt(l); }));
            }
            x = draw_panel(sqrts, c.T, c.n, rng);
            x_oos = draw_panel(sqrts, c.T, c.n, rng);
        } else {
            Vector d = gen_lognormal_diag(c.n, c.alpha2, rng);
            sigma_true = Matrix(d.asDiagonal());
            Vector s = d.array().sqrt();
            auto draw = [&](int rows) {
                Matrix m(rows, c.n);
                for (int t = 0; t < rows; ++t)
                    for (int i = 0; i < c.n; ++i) m(t, i) = s(i) * rng.normal();
                return m;
            };
            x = draw(c.T);
            x_oos = draw(c.T);
        }

        ReturnPanel panel;
        panel.X = std::move(x);
        Matrix sigma_hat = fit_kronecker_covariance(panel, dm.spec, c.estimator, nullptr);
        bool ridged = false;
        Matrix sigma_tilde = sample_covariance(panel, &ridged);

        rec.prial1 = prial(sigma_hat, sigma_tilde, sigma_true, false);
        rec.prial2 = c.n < c.T ? prial(sigma_hat, sigma_tilde, sigma_true, true)
                               : std::numeric_limits<double>::quiet_NaN();
        rec.vr = variance_ratio(sigma_hat, sigma_tilde, x_oos);
        rec.ok = true;
    } catch (const Error& e) {
        rec.error = e.code();
    }
    return rec;
}

}  // namespace

SimResult run_experiment(const SimConfig& c) {
    if (c.replications < 1) throw BadInput("replications must be >= 1");
    auto t0 = std::chrono::steady_clock::now();

    FactorizationSpec spec;
    spec.dims.assign(binary_exponent(c.n), 2);
    DesignMatrix dm = DesignMatrix::build(spec);

    const std::string digest = config_digest(c);
    SimResult result;
    result.reps.assign(c.replications, RepRecord{});
    std::vector<bool> done(c.replications, false);

    // Resume from an existing stream file: records with a matching config
    // digest are trusted and not recomputed.
    if (!c.stream_path.empty()) {
        std::ifstream in(c.stream_path);
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || j.value("config_digest", "") != digest) continue;
            int rep = j.value("rep", -1);
            if (rep < 0 || rep >= c.replications || !j.value("ok", false)) continue;
            RepRecord& rec = result.reps[rep];
            rec.rep = rep;
            rec.prial1 = j.value("prial1", 0.0);
            rec.prial2 = j.value("prial2", std::numeric_limits<double>::quiet_NaN());
            rec.vr = j.value("vr", 0.0);
            rec.ok = true;
            done[rep] = true;
        }
    }

    parallel_for(c.replications, c.threads, [&](int rep) {
        if (done[rep]) return;
        result.reps[rep] = run_one_rep(c, dm, rep);
    });

    if (!c.stream_path.empty()) {
        std::ofstream out(c.stream_path, std::ios::app);
        for (int rep = 0; rep < c.replications; ++rep) {
            if (done[rep]) continue;  // already on disk
            const RepRecord& rec = result.reps[rep];
            json j{{"schema", "kroncov/1"},
                   {"kind", "sim_rep"},
                   {"config_digest", digest},
                   {"rep", rec.rep},
                   {"ok", rec.ok}};
            if (rec.ok) {
                j["prial1"] = rec.prial1;
                if (std::isfinite(rec.prial2)) j["prial2"] = rec.prial2;
                j["vr"] = rec.vr;
            } else {
                j["error"] = rec.error;
            }
            out << j.dump() << '\n';
        }
    }

    std::vector<double> p1, p2, vr;
    for (const RepRecord& rec : result.reps) {
        if (!rec.ok) {
            ++result.failures;
            continue;
        }
        ++result.completed;
        p1.push_back(rec.prial1);
        if (std::isfinite(rec.prial2)) p2.push_back(rec.prial2);
        vr.push_back(rec.vr);
    }
    result.median_prial1 = median(std::move(p1));
    result.median_prial2 = median(std::move(p2));
    result.median_vr = median(std::move(vr));
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace kroncov
