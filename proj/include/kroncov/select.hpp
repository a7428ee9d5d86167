#pragma once

#include <string>

#include "kroncov/estimate.hpp"
#include "kroncov/rng.hpp"

namespace kroncov {

struct ModelCandidate {
    FactorizationSpec spec;
    int q = 0;          // identified parameter count, rank(E)
    double loglik = 0.0;
    double bic = 0.0;
    bool ok = false;
    std::string error;
};

// Identified linear parameter count of a factorization (= rank of E).
int identified_params(const FactorizationSpec& spec);
// Correlation-scale parameter count 1 + sum_j n_j(n_j-1)/2, the model-size
// notion used to pre-screen enumerated factorizations.
int correlation_params(const FactorizationSpec& spec);

// All factorizations with factors >= 2 whose product lies in
// [n, n + allow_padding_up_to] and whose correlation parameter count is at
// most max_params. Factor multisets are deduplicated; with
// `distinct_orderings` every distinct ordering is emitted (Kronecker products
// are order-sensitive), otherwise only the ascending one.
std::vector<FactorizationSpec> enumerate_factorizations(int n, int max_params,
                                                        int allow_padding_up_to,
                                                        bool distinct_orderings = true);

struct SelectOptions {
    Method method = Method::QMLE;
    std::uint64_t seed = 0;  // pseudo-variable draws for padded candidates
    int threads = 0;
};

// Fits every candidate and ranks by BIC = -2 loglik + q log T (ascending).
// Fits that fail stay in the list with ok = false, after all successes.
// BIC values are only comparable between candidates with equal padding.
std::vector<ModelCandidate> select_model(const ReturnPanel& panel,
                                         const std::vector<FactorizationSpec>& candidates,
                                         const SelectOptions& opts = SelectOptions{});

}  // namespace kroncov
