#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "kroncov/select.hpp"
#include "kroncov/simlab.hpp"
#include "oracles.hpp"

using namespace kroncov;

namespace {

// Independent enumeration: DFS over ordered divisor sequences, collected as
// sorted multisets.
void ordered_sequences(int target, std::vector<int>& stack, std::set<std::vector<int>>& out) {
    if (target == 1) {
        if (!stack.empty()) {
            std::vector<int> sorted = stack;
            std::sort(sorted.begin(), sorted.end());
            out.insert(sorted);
        }
        return;
    }
    for (int f = 2; f <= target; ++f) {
        if (target % f != 0) continue;
        stack.push_back(f);
        ordered_sequences(target / f, stack, out);
        stack.pop_back();
    }
}

std::set<std::vector<int>> multiset_oracle(int n) {
    std::set<std::vector<int>> out;
    std::vector<int> stack;
    ordered_sequences(n, stack, out);
    return out;
}

bool contains_spec(const std::vector<FactorizationSpec>& specs, std::vector<int> dims, int pad) {
    std::sort(dims.begin(), dims.end());
    for (const FactorizationSpec& s : specs) {
        std::vector<int> d = s.dims;
        std::sort(d.begin(), d.end());
        if (d == dims && s.pad == pad) return true;
    }
    return false;
}

ReturnPanel kron_panel(const Vector& rho, int t_obs, Rng& rng) {
    std::vector<Matrix> factors = kronecker_factors_from_rhos(rho);
    std::vector<Matrix> sqrts;
    long n = 1;
    for (const Matrix& f : factors) {
        n *= 2;
        SpdEigen eig = spd_eigen(SymMatrix::from(f, 1e-12));
        sqrts.push_back(eig.apply_function([](double l) { return std::sqrt(l); }));
    }
    ReturnPanel panel;
    panel.X.resize(t_obs, n);
    Vector z(n);
    for (int t = 0; t < t_obs; ++t) {
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        panel.X.row(t) = kron_apply(sqrts, z).transpose();
    }
    return panel;
}

}  // namespace

TEST_CASE("small enumerations are exhaustive") {
    auto four = enumerate_factorizations(4, 1000, 0);
    REQUIRE(four.size() == 2);
    CHECK(contains_spec(four, {4}, 0));
    CHECK(contains_spec(four, {2, 2}, 0));

    auto eight = enumerate_factorizations(8, 1000, 0);
    CHECK(eight.size() == 4);  // (8), (4,2), (2,4), (2,2,2): orderings count
    CHECK(contains_spec(eight, {8}, 0));
    CHECK(contains_spec(eight, {2, 4}, 0));
    CHECK(contains_spec(eight, {2, 2, 2}, 0));
    int order_distinct_42 = 0;
    for (const FactorizationSpec& s : eight) {
        if (s.dims == std::vector<int>{4, 2} || s.dims == std::vector<int>{2, 4}) {
            ++order_distinct_42;
        }
    }
    CHECK(order_distinct_42 == 2);
}

TEST_CASE("enumeration matches a brute-force multiset oracle up to n = 64") {
    for (int n = 2; n <= 64; ++n) {
        auto specs = enumerate_factorizations(n, 1 << 20, 0, /*distinct_orderings=*/false);
        std::set<std::vector<int>> got;
        for (const FactorizationSpec& s : specs) {
            std::vector<int> d = s.dims;
            std::sort(d.begin(), d.end());
            got.insert(d);
        }
        CHECK(got == multiset_oracle(n));
        CHECK(got.size() == specs.size());  // no duplicate multisets
    }
}

TEST_CASE("padded enumeration covers the documented candidates") {
    auto specs = enumerate_factorizations(441, 30, 71, /*distinct_orderings=*/false);
    CHECK(contains_spec(specs, {2, 2, 2, 2, 2, 2, 2, 2, 2}, 71));       // 512
    CHECK(contains_spec(specs, {2, 2, 2, 2, 2, 2, 7}, 7));              // 448
    CHECK(contains_spec(specs, {2, 3, 3, 5, 5}, 9));                    // 450
    CHECK(contains_spec(specs, {2, 3, 3, 3, 3, 3}, 45));                // 486
    for (const FactorizationSpec& s : specs) {
        CHECK(correlation_params(s) <= 30);
        long prod = s.n_effective();
        CHECK(prod >= 441);
        CHECK(prod <= 512);
        CHECK(s.pad == prod - 441);
    }
    // the binary tower's correlation parameter count matches its design rank
    FactorizationSpec tower;
    tower.dims.assign(9, 2);
    CHECK(correlation_params(tower) == 10);
    CHECK(identified_params(tower) == 10);
}

TEST_CASE("identified parameter count equals the rank of E") {
    for (auto dims : std::vector<std::vector<int>>{{2, 2}, {2, 2, 2}, {3, 2}, {4, 2}, {6}}) {
        FactorizationSpec spec;
        spec.dims = dims;
        DesignMatrix dm = DesignMatrix::build(spec);
        Eigen::FullPivLU<Matrix> lu(Matrix(dm.E));
        CHECK(identified_params(spec) == lu.rank());
        CHECK(identified_params(spec) == dm.q());
    }
}

TEST_CASE("select_model on a single candidate returns its BIC") {
    Rng rng(111, 0);
    Vector rho(2);
    rho << 0.4, 0.25;
    ReturnPanel panel = kron_panel(rho, 200, rng);
    FactorizationSpec spec;
    spec.dims = {2, 2};
    auto ranked = select_model(panel, {spec});
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].ok);
    CHECK(ranked[0].q == 3);
    CHECK(ranked[0].bic ==
          doctest::Approx(-2.0 * ranked[0].loglik + 3.0 * std::log(200.0)).epsilon(1e-12));
}

TEST_CASE("bic ordering is invariant to a common loglik shift") {
    Rng rng(112, 0);
    Vector rho(3);
    rho << 0.5, 0.3, 0.4;
    ReturnPanel panel = kron_panel(rho, 400, rng);
    std::vector<FactorizationSpec> candidates;
    for (auto dims : std::vector<std::vector<int>>{{8}, {4, 2}, {2, 2, 2}}) {
        FactorizationSpec s;
        s.dims = dims;
        candidates.push_back(s);
    }
    auto ranked = select_model(panel, candidates);
    REQUIRE(ranked.size() == 3);
    for (const auto& c : ranked) REQUIRE(c.ok);
    const double shift = 123.456;
    std::vector<double> shifted;
    for (const auto& c : ranked) shifted.push_back(-2.0 * (c.loglik + shift) + c.q * std::log(400.0));
    CHECK(std::is_sorted(shifted.begin(), shifted.end()));
}

TEST_CASE("true binary factorization wins the BIC race most of the time") {
    int wins = 0;
    const int reps = 20;
    std::vector<FactorizationSpec> candidates;
    for (auto dims : std::vector<std::vector<int>>{{8}, {4, 2}, {2, 2, 2}}) {
        FactorizationSpec s;
        s.dims = dims;
        candidates.push_back(s);
    }
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(113, rep);
        Vector rho(3);
        for (int j = 0; j < 3; ++j) rho(j) = rng.uniform(0.2, 0.8);
        ReturnPanel panel = kron_panel(rho, 1000, rng);
        auto ranked = select_model(panel, candidates);
        if (ranked[0].ok && ranked[0].spec.dims == std::vector<int>{2, 2, 2}) ++wins;
    }
    CHECK(wins >= reps * 8 / 10);
}

TEST_CASE("failed candidates are kept with a reason") {
    Rng rng(114, 0);
    Vector rho(2);
    rho << 0.4, 0.25;
    ReturnPanel panel = kron_panel(rho, 200, rng);
    FactorizationSpec good;
    good.dims = {2, 2};
    FactorizationSpec wrong;
    wrong.dims = {2, 2, 2};  // width 8 vs panel width 4; no padding requested
    wrong.pad = 0;
    auto ranked = select_model(panel, {good, wrong});
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].ok);
    CHECK_FALSE(ranked[1].ok);
    CHECK(ranked[1].error == "bad_input");
}
