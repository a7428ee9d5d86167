#include "kroncov/panel.hpp"

namespace kroncov {

void ReturnPanel::validate() const {
    if (T() < 2) throw BadInput("panel needs at least two observations");
    if (n() < 1) throw BadInput("panel needs at least one column");
    if (X.hasNaN()) throw BadInput("panel contains NaN");
    if (known_mu && known_mu->size() != n()) throw BadInput("known mean has wrong length");
    if (known_d) {
        if (known_d->size() != n()) throw BadInput("known variance vector has wrong length");
        if ((known_d->array() <= 0.0).any()) throw BadInput("known variances must be positive");
    }
}

PanelMoments compute_moments(const ReturnPanel& panel) {
    panel.validate();
    PanelMoments out;
    out.T = panel.T();
    out.mu = panel.known_mu ? *panel.known_mu : Vector(panel.X.colwise().mean());
    Matrix centered = panel.X.rowwise() - out.mu.transpose();
    out.sigma_tilde = centered.transpose() * centered / static_cast<double>(out.T);
    out.d = panel.known_d ? *panel.known_d : Vector(out.sigma_tilde.diagonal());
    if ((out.d.array() <= 0.0).any()) {
        throw BadInput("panel has a zero-variance column; cannot standardize");
    }
    Vector s = out.d.array().rsqrt();
    out.m = SymMatrix::from(s.asDiagonal() * out.sigma_tilde * s.asDiagonal());
    return out;
}

SymMatrix sample_moment_matrix(const ReturnPanel& panel) { return compute_moments(panel).m; }

}  // namespace kroncov
