#pragma once

#include <optional>

#include "kroncov/design.hpp"
#include "kroncov/panel.hpp"

namespace kroncov {

enum class Method { MD, OneStep, QMLE };

const char* method_name(Method m);

// Weight specification for the minimum-distance objective. FeasibleOptimal
// carries an explicit matrix too; build it with make_optimal_weight.
struct WeightSpec {
    enum class Kind { Identity, Explicit, FeasibleOptimal };
    Kind kind = Kind::Identity;
    Matrix W;

    static WeightSpec identity() { return WeightSpec{}; }
    static WeightSpec explicit_matrix(Matrix w) {
        return WeightSpec{Kind::Explicit, std::move(w)};
    }
};

struct ThetaEstimate {
    Vector theta;
    Method method = Method::MD;
    WeightSpec::Kind weight = WeightSpec::Kind::Identity;
    std::optional<double> loglik;
    int iterations = 0;
    bool converged = true;
};

// Weighted least-squares projection of vech(log M) onto col(E):
// theta = (E' W E)^{-1} E' W vech(log M).
ThetaEstimate md_estimate(const SymMatrix& m, const DesignMatrix& dm,
                          const WeightSpec& w = WeightSpec::identity());

// Gaussian log likelihood of the panel at theta, evaluated through the factor
// structure (factor determinants and inverses; the full matrix is never
// materialized).
double gaussian_loglik(const DesignMatrix& dm, const Vector& theta, const ReturnPanel& panel);
double gaussian_loglik(const DesignMatrix& dm, const Vector& theta, const PanelMoments& mom,
                       int n_obs);

// Analytic score of the Gaussian quasi-likelihood.
Vector score(const DesignMatrix& dm, const Vector& theta, const ReturnPanel& panel);
Vector score_from_moments(const DesignMatrix& dm, const Vector& theta, const Matrix& m_tilde,
                          int n_obs);

// Plug-in expected Hessian built from the sample moment matrix.
Matrix expected_hessian_hat(const DesignMatrix& dm, const SymMatrix& m);
// Model-based expected Hessian at theta (always negative definite).
Matrix expected_hessian_at(const DesignMatrix& dm, const Vector& theta);

// Full analytic Hessian of the quasi-likelihood (dense kernels; testing aid).
Matrix full_hessian(const DesignMatrix& dm, const Vector& theta, const ReturnPanel& panel);

// Single Newton-type step from `init` using the expected Hessian.
ThetaEstimate one_step(const ThetaEstimate& init, const DesignMatrix& dm,
                       const ReturnPanel& panel);

struct QmleOptions {
    double tol = 1e-8;   // stop when ||score||_inf / T drops below this
    int max_iter = 100;
    double rho_cap = 1.0 - 1e-6;  // factor correlations stay inside (-cap, cap)
};

// Safeguarded Fisher scoring on the Gaussian quasi-likelihood. Starts from
// `init` when given, else from the MD estimate (or zero if log M fails).
ThetaEstimate qmle(const ReturnPanel& panel, const DesignMatrix& dm,
                   std::optional<Vector> init = std::nullopt, QmleOptions opts = QmleOptions{});

}  // namespace kroncov
