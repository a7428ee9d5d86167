#include "kroncov/select.hpp"

#include <algorithm>
#include <cmath>

#include "kroncov/threading.hpp"

namespace kroncov {

int identified_params(const FactorizationSpec& spec) {
    if (spec.is_binary()) return spec.v() + 1;
    int total = 0;
    for (int d : spec.dims) total += vech_size(d);
    return total - (spec.v() - 1);
}

int correlation_params(const FactorizationSpec& spec) {
    int total = 1;
    for (int d : spec.dims) total += d * (d - 1) / 2;
    return total;
}

namespace {

void factor_multisets(int target, int min_factor, std::vector<int>& stack,
                      std::vector<std::vector<int>>& out) {
    if (target == 1) {
        if (!stack.empty()) out.push_back(stack);
        return;
    }
    for (int f = min_factor; f <= target; ++f) {
        if (target % f != 0) continue;
        stack.push_back(f);
        factor_multisets(target / f, f, stack, out);
        stack.pop_back();
    }
}

}  // namespace

std::vector<FactorizationSpec> enumerate_factorizations(int n, int max_params,
                                                        int allow_padding_up_to,
                                                        bool distinct_orderings) {
    if (n < 2) throw BadInput("enumeration needs n >= 2");
    if (allow_padding_up_to < 0) throw BadInput("padding bound must be >= 0");
    std::vector<FactorizationSpec> specs;
    for (int target = n; target <= n + allow_padding_up_to; ++target) {
        if (target > kMaxDim) break;
        std::vector<std::vector<int>> multisets;
        std::vector<int> stack;
        factor_multisets(target, 2, stack, multisets);
        for (std::vector<int>& dims : multisets) {
            FactorizationSpec spec;
            spec.dims = dims;
            spec.pad = target - n;
            if (correlation_params(spec) > max_params) continue;
            if (!distinct_orderings) {
                specs.push_back(std::move(spec));
                continue;
            }
            std::sort(dims.begin(), dims.end());
            do {
                FactorizationSpec s;
                s.dims = dims;
                s.pad = target - n;
                specs.push_back(std::move(s));
            } while (std::next_permutation(dims.begin(), dims.end()));
        }
    }
    return specs;
}

std::vector<ModelCandidate> select_model(const ReturnPanel& panel,
                                         const std::vector<FactorizationSpec>& candidates,
                                         const SelectOptions& opts) {
    if (candidates.empty()) throw BadInput("select_model needs at least one candidate");
    panel.validate();
    const double log_t = std::log(static_cast<double>(panel.T()));

    std::vector<ModelCandidate> out(candidates.size());
    parallel_for(static_cast<int>(candidates.size()), opts.threads, [&](int i) {
        ModelCandidate& cand = out[i];
        cand.spec = candidates[i];
        try {
            cand.spec.validate();
            if (cand.spec.data_dim() != panel.n()) {
                throw BadInput("candidate dimension does not match panel");
            }
            ReturnPanel fit_panel = panel;
            if (cand.spec.pad > 0) {
                Rng rng(opts.seed, static_cast<std::uint64_t>(i) + 1);
                Matrix xp(panel.T(), panel.n() + cand.spec.pad);
                xp.leftCols(panel.n()) = panel.X;
                for (int t = 0; t < panel.T(); ++t)
                    for (int k = 0; k < cand.spec.pad; ++k)
                        xp(t, panel.n() + k) = rng.normal();
                fit_panel.X = std::move(xp);
                fit_panel.names.clear();
            }
            DesignMatrix dm = DesignMatrix::build(cand.spec);
            cand.q = dm.q();
            ThetaEstimate est;
            switch (opts.method) {
                case Method::MD: {
                    PanelMoments mom = compute_moments(fit_panel);
                    est = md_estimate(mom.m, dm);
                    est.loglik = gaussian_loglik(dm, est.theta, mom, mom.T);
                    break;
                }
                case Method::OneStep: {
                    PanelMoments mom = compute_moments(fit_panel);
                    est = one_step(md_estimate(mom.m, dm), dm, fit_panel);
                    break;
                }
                case Method::QMLE:
                    est = qmle(fit_panel, dm);
                    break;
            }
            cand.loglik = est.loglik.value();
            cand.bic = -2.0 * cand.loglik + cand.q * log_t;
            cand.ok = true;
        } catch (const Error& e) {
            cand.error = e.code();
        }
    });

    std::stable_sort(out.begin(), out.end(), [](const ModelCandidate& a, const ModelCandidate& b) {
        if (a.ok != b.ok) return a.ok;
        if (!a.ok) return false;
        if (a.bic != b.bic) return a.bic < b.bic;
        if (a.q != b.q) return a.q < b.q;
        return a.spec.dims < b.spec.dims;
    });
    return out;
}

}  // namespace kroncov
