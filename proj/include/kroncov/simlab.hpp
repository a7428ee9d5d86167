#pragma once

#include <string>

#include "kroncov/estimate.hpp"
#include "kroncov/rng.hpp"

namespace kroncov {

enum class Dgp { KroneckerTrue, LognormalDiag };

const char* dgp_name(Dgp d);

struct SimConfig {
    Dgp dgp = Dgp::KroneckerTrue;
    int n = 16;
    int T = 300;
    int replications = 200;
    std::uint64_t seed = 0;
    double alpha2 = 0.05;  // eigenvalue dispersion, lognormal DGP only
    Method estimator = Method::QMLE;
    int threads = 0;
    std::string stream_path;  // JSON-lines per-replication records; resumable
};

struct RepRecord {
    int rep = 0;
    double prial1 = 0.0;
    double prial2 = 0.0;
    double vr = 0.0;
    bool ok = false;
    std::string error;
};

struct SimResult {
    std::vector<RepRecord> reps;
    double median_prial1 = 0.0;
    double median_prial2 = 0.0;
    double median_vr = 0.0;
    int completed = 0;
    int failures = 0;
    double seconds = 0.0;
};

// 2x2 correlation factors with off-diagonals drawn uniformly on (0, 1).
std::vector<Matrix> gen_kronecker_factors(int v, Rng& rng);
std::vector<Matrix> kronecker_factors_from_rhos(const Vector& rho);

// Diagonal covariance with log-normal entries: mean 1, variance alpha2.
Vector gen_lognormal_diag(int n, double alpha2, Rng& rng);

// Percentage relative improvement in loss against the sample covariance for
// one replication; `inverse` switches to precision-matrix loss.
double prial(const Matrix& estimate, const Matrix& sample, const Matrix& truth, bool inverse);

// Out-of-sample MVP variance ratio of the structured estimator over the
// sample covariance estimator.
double variance_ratio(const Matrix& estimate, const Matrix& sample, const Matrix& holdout);

SimResult run_experiment(const SimConfig& config);

double median(std::vector<double> values);

}  // namespace kroncov
