#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kroncov/matcore.hpp"

namespace kroncov {

// T x n observation panel. Mean and variance scaling default to their sample
// counterparts but can be pinned when known (both moments use the 1/T
// convention so the standardized second-moment matrix has an exact unit
// diagonal under the defaults).
struct ReturnPanel {
    Matrix X;
    std::vector<std::string> names;
    std::optional<Vector> known_mu;
    std::optional<Vector> known_d;  // variances, i.e. the diagonal of D

    int T() const { return static_cast<int>(X.rows()); }
    int n() const { return static_cast<int>(X.cols()); }
    void validate() const;
};

// Moments resolved once per fit.
struct PanelMoments {
    Vector mu;
    Vector d;
    Matrix sigma_tilde;  // (1/T) sum (x_t - mu)(x_t - mu)'
    SymMatrix m;         // D^{-1/2} sigma_tilde D^{-1/2}
    int T = 0;
};

PanelMoments compute_moments(const ReturnPanel& panel);
SymMatrix sample_moment_matrix(const ReturnPanel& panel);

}  // namespace kroncov
