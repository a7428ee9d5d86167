#pragma once

#include "kroncov/estimate.hpp"

namespace kroncov {

enum class VarianceMode { Empirical, Gaussian };

const char* variance_mode_name(VarianceMode m);

// Plug-in asymptotic variance of the MD estimator.
struct JMatrix {
    Matrix J;
    VarianceMode mode = VarianceMode::Empirical;
};

struct TestResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool rejected_5pct = false;
    double normalized = 0.0;  // (stat - df) / sqrt(2 df)
};

struct OveridResult {
    TestResult test;
    Vector theta;           // optimally weighted fit used by the statistic
    double s_condition = 0.0;
    bool condition_warning = false;
};

struct IntervalEstimate {
    double value = 0.0;
    double se = 0.0;
    double lower(double z = 1.959963984540054) const { return value - z * se; }
    double upper(double z = 1.959963984540054) const { return value + z * se; }
};

struct SpectralSummary {
    IntervalEstimate mean;      // theta_1
    IntervalEstimate variance;  // sum_j theta_{j+1}^2
};

struct ExtremeLogEigs {
    IntervalEstimate omega_max;
    IntervalEstimate omega_min;
    bool abs_correction = false;  // some fitted correlation was negative
};

// Sandwich variance J = B V B' with B = (E'WE)^{-1} E'W Dn+ H (D (x) D)^{-1/2},
// accumulated streaming over observations; V is never stored. Gaussian mode
// replaces V by its normal-theory form and reduces to kernel traces.
JMatrix jhat(const ReturnPanel& panel, const SymMatrix& m, const DesignMatrix& dm,
             const WeightSpec& w, VarianceMode mode);

// Wald test of A' theta = a with k = cols(A) restrictions.
TestResult wald_test(const Matrix& a_mat, const Vector& a, const Vector& theta, const JMatrix& j,
                     int n_obs);

inline constexpr int kOveridDimLimit = 32;

// Two-stage over-identification test of the Kronecker restriction:
// S from a preliminary identity-weight fit, then the optimally weighted
// objective value with df = n(n+1)/2 - q.
OveridResult overid_test(const ReturnPanel& panel, const DesignMatrix& dm,
                         VarianceMode mode = VarianceMode::Empirical);

// Weight matrix S^{-1} for the optimally weighted MD estimator.
WeightSpec make_optimal_weight(const ReturnPanel& panel, const DesignMatrix& dm,
                               VarianceMode mode = VarianceMode::Empirical);

// Delta-method summaries of the fitted log-spectral distribution (binary
// factorizations).
SpectralSummary spectral_params(const DesignMatrix& dm, const Vector& theta, const JMatrix& j,
                                int n_obs);
ExtremeLogEigs extreme_log_eigs(const DesignMatrix& dm, const Vector& theta, const JMatrix& j,
                                int n_obs);
IntervalEstimate mvp_log_variance(const DesignMatrix& dm, const Vector& theta, const JMatrix& j,
                                  int n_obs);

// Upper tail of the chi-square distribution via the regularized incomplete
// gamma function.
double chi2_upper_tail(double x, double df);
double normal_cdf(double x);

}  // namespace kroncov
