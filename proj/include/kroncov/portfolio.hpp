#pragma once

#include <limits>
#include <string>

#include "kroncov/estimate.hpp"
#include "kroncov/rng.hpp"

namespace kroncov {

struct MvpResult {
    Vector weights;   // sums to 1
    double variance;  // w' Sigma w under the estimated covariance
};

// Minimum-variance portfolio from Kronecker correlation factors and a
// variance vector d (Sigma = D^{1/2} (kron factors) D^{1/2}). Solves through
// the factors, never materializing Sigma.
MvpResult mvp_weights(const std::vector<Matrix>& factors, const Vector& d);

// Dense fallback used for padded fits and the sample-covariance comparator.
MvpResult mvp_weights_dense(const Matrix& sigma);

// Restrict-then-renormalize: weights on the first data_dim coordinates of a
// (possibly padded) fit; padding coordinates get zero weight.
MvpResult mvp_weights_block(const KroneckerCorrelation& corr, const Vector& d, int data_dim);

struct BacktestConfig {
    int window_m = 0;    // estimation window length
    int horizon = 21;    // evaluation length; windows shift by this amount
    std::vector<FactorizationSpec> specs;  // Kronecker estimators to run
    Method method = Method::QMLE;
    std::uint64_t seed = 0;  // drives pseudo-variable padding draws
    int threads = 0;
};

struct WindowOutcome {
    double realized_variance = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    bool ridged = false;  // sample covariance needed a ridge
    std::string error;
};

struct EstimatorSummary {
    std::string name;
    double prop = 0.0;   // fraction of windows beating the sample covariance
    double impr = 0.0;   // percent improvement of average out-of-sample risk
    int windows_used = 0;
    int failures = 0;
};

struct BacktestReport {
    int windows = 0;
    int window_m = 0;
    int horizon = 0;
    std::vector<std::string> estimator_names;  // "sample" first
    // per window, per estimator
    std::vector<std::vector<WindowOutcome>> outcomes;
    std::vector<EstimatorSummary> summaries;   // one per Kronecker estimator
};

// Rolling out-of-sample evaluation: fit on m days, realize the MVP variance
// on the next `horizon` days, shift by `horizon`.
BacktestReport rolling_backtest(const ReturnPanel& panel, const BacktestConfig& config);

// Fits one estimator on a window and returns the implied covariance of the
// real coordinates. Exposed for the simulation lab.
Matrix fit_kronecker_covariance(const ReturnPanel& window, const FactorizationSpec& spec,
                                Method method, Rng* pad_rng);

// Sample covariance with a ridge fallback when singular; `ridged` reports
// whether the ridge was applied.
Matrix sample_covariance(const ReturnPanel& window, bool* ridged);

}  // namespace kroncov
