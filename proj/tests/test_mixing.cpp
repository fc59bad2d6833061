#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mixsdp/certificate.hpp"
#include "mixsdp/mixing.hpp"

using namespace mixsdp;

namespace {

SparseCost single_edge() { return build_cost(2, {{0, 1, 1.0}}); }

SparseCost complete_graph(int n) {
    std::vector<Triple> t;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t.push_back({i, j, 1.0});
    return build_cost(n, t);
}

SparseCost random_graph_cost(int n, double density, std::uint64_t seed, bool unit_weights) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    std::vector<Triple> t;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(gen) < density) t.push_back({i, j, unit_weights ? 1.0 : weight(gen)});
    if (t.empty()) t.push_back({0, n - 1, 1.0});
    return build_cost(n, t);
}

// Reference sweep with an explicit column order, kept independent of the
// production loop. Returns the identity right-hand side for that order.
double reference_sweep(const SparseCost& c, FactorMatrix& v, const std::vector<int>& order,
                       double delta) {
    const int k = v.rank();
    double rhs = 0.0;
    std::vector<double> g(k);
    for (int i : order) {
        std::fill(g.begin(), g.end(), 0.0);
        for (const auto& e : c.row(i))
            for (int t = 0; t < k; ++t) g[t] += e.value * v.column(e.col)[t];
        double y = 0.0;
        for (double x : g) y += x * x;
        y = std::sqrt(y);
        if (y < delta) continue;
        auto vi = v.column(i);
        double diff_sq = 0.0;
        for (int t = 0; t < k; ++t) {
            const double updated = -g[t] / y;
            const double d = vi[t] - updated;
            diff_sq += d * d;
            vi[t] = updated;
        }
        rhs += y * diff_sq;
    }
    return rhs;
}

double max_column_gap(const FactorMatrix& a, const FactorMatrix& b) {
    double gap = 0.0;
    for (int i = 0; i < a.cols(); ++i)
        for (int t = 0; t < a.rank(); ++t)
            gap = std::max(gap, std::abs(a.column(i)[t] - b.column(i)[t]));
    return gap;
}

} // namespace

TEST_CASE("sweep hand example on the single edge") {
    MixingState st(FactorMatrix::from_columns({{1, 0}, {0, 1}}));
    const SweepReport rep = sweep(single_edge(), st, 1e-12);

    CHECK(st.V.column(0)[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(st.V.column(0)[1] == Catch::Approx(-1.0));
    CHECK(st.V.column(1)[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(st.V.column(1)[1] == Catch::Approx(1.0));
    CHECK(rep.f_before == Catch::Approx(0.0).margin(1e-15));
    CHECK(rep.f_after == Catch::Approx(-2.0));
    CHECK(rep.identity_lhs == Catch::Approx(2.0));
    CHECK(rep.identity_rhs == Catch::Approx(2.0));
    CHECK(rep.degenerate_hits == 0);
    CHECK(st.y_scratch[0] == Catch::Approx(1.0));
    CHECK(st.y_scratch[1] == Catch::Approx(1.0));
}

TEST_CASE("sweep leaves a fixed point unchanged") {
    MixingState st(FactorMatrix::from_columns({{1, 0}, {-1, 0}}));
    const SweepReport rep = sweep(single_edge(), st, 1e-12);
    CHECK(rep.identity_lhs == Catch::Approx(0.0).margin(1e-15));
    CHECK(st.V.column(0)[0] == 1.0);
    CHECK(st.V.column(1)[0] == -1.0);
}

TEST_CASE("decrease identity holds on every sweep of a random instance") {
    const SparseCost c = random_graph_cost(20, 0.4, 99, true);
    MixingState st(random_init(20, 7, 1));
    for (int s = 0; s < 60; ++s) {
        const SweepReport rep = sweep(c, st, 1e-12);
        const double tol = 1e-10 * std::max(1.0, std::abs(rep.f_before));
        CHECK(std::abs(rep.identity_lhs - rep.identity_rhs) <= tol);
        CHECK(st.V.max_norm_defect() <= 1e-9);
    }
}

TEST_CASE("plain sweeps decrease monotonically") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SparseCost c = random_graph_cost(30, 0.3, 7 + seed, false);
        MixingState st(random_init(30, 8, seed));
        for (int s = 0; s < 40; ++s) {
            const SweepReport rep = sweep(c, st, 1e-12);
            if (rep.degenerate_hits == 0)
                CHECK(rep.f_after <= rep.f_before + 1e-9 * std::max(1.0, std::abs(rep.f_before)));
        }
    }
}

TEST_CASE("a zero row trips the degeneracy guard and is reported") {
    // vertex 2 is isolated
    const SparseCost c = build_cost(3, {{0, 1, 1.0}});
    MixingState st(random_init(3, 2, 4));
    const auto before = st.V.column(2);
    const std::vector<double> frozen(before.begin(), before.end());
    const SweepReport rep = sweep(c, st, 1e-12);
    CHECK(rep.degenerate_hits == 1);
    REQUIRE(rep.degenerate_indices.size() == 1);
    CHECK(rep.degenerate_indices[0] == 2);
    for (int t = 0; t < 2; ++t) CHECK(st.V.column(2)[t] == frozen[t]);
    const double tol = 1e-10 * std::max(1.0, std::abs(rep.f_before));
    CHECK(std::abs(rep.identity_lhs - rep.identity_rhs) <= tol);
}

TEST_CASE("sweep order matters but the identity is order-free") {
    const SparseCost c = random_graph_cost(12, 0.5, 5, false);
    const FactorMatrix v0 = random_init(12, 5, 3);

    // ascending order reference reproduces the production sweep exactly
    MixingState st(v0);
    sweep(c, st, 1e-12);
    FactorMatrix ref_asc = v0;
    std::vector<int> asc(12);
    std::iota(asc.begin(), asc.end(), 0);
    reference_sweep(c, ref_asc, asc, 1e-12);
    CHECK(max_column_gap(st.V, ref_asc) <= 1e-14);

    // a shuffled order gives a different iterate yet satisfies its identity
    std::vector<int> shuffled = {7, 2, 9, 0, 11, 4, 1, 10, 3, 8, 6, 5};
    FactorMatrix ref_shuf = v0;
    const double f_before = objective(c, ref_shuf);
    const double rhs = reference_sweep(c, ref_shuf, shuffled, 1e-12);
    const double lhs = f_before - objective(c, ref_shuf);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(f_before)));
    CHECK(max_column_gap(st.V, ref_shuf) > 1e-3);
}

TEST_CASE("sweep_step keeps the optimum fixed") {
    MixingState st(FactorMatrix::from_columns({{1, 0}, {-1, 0}}));
    const SweepReport rep = sweep_step(single_edge(), st, 0.5);
    CHECK(rep.identity_lhs == Catch::Approx(0.0).margin(1e-15));
    CHECK(st.V.column(0)[0] == Catch::Approx(1.0));
    CHECK(st.V.column(1)[0] == Catch::Approx(-1.0));
}

TEST_CASE("sweep_step hand example and identity") {
    MixingState st(FactorMatrix::from_columns({{1, 0}, {0, 1}}));
    const SweepReport rep = sweep_step(single_edge(), st, 0.5);
    const double inv_sqrt5 = 1.0 / std::sqrt(5.0);
    CHECK(st.V.column(0)[0] == Catch::Approx(2.0 * inv_sqrt5));
    CHECK(st.V.column(0)[1] == Catch::Approx(-inv_sqrt5));
    CHECK(rep.identity_lhs > 0.0);
    CHECK(std::abs(rep.identity_lhs - rep.identity_rhs) <= 1e-10);
}

TEST_CASE("sweep_step never degenerates: normalizers stay above the bound") {
    const SparseCost c = random_graph_cost(25, 0.3, 12, false);
    const double theta = safe_theta(c);
    const double floor = 1.0 - theta * c.max_row_one_norm(); // = 0.01
    MixingState st(random_init(25, 8, 2));
    for (int s = 0; s < 30; ++s) {
        const SweepReport rep = sweep_step(c, st, theta);
        const double tol = 1e-10 * std::max(1.0, std::abs(rep.f_before));
        CHECK(std::abs(rep.identity_lhs - rep.identity_rhs) <= tol);
        for (int i = 0; i < 25; ++i) CHECK(st.y_scratch[i] >= floor - 1e-12);
        CHECK(st.V.max_norm_defect() <= 1e-9);
    }
}

TEST_CASE("sweep_step rejects a step outside the open interval") {
    const SparseCost c = single_edge();
    MixingState st(random_init(2, 2, 0));
    CHECK_THROWS_AS(sweep_step(c, st, 1.0), input_error); // theta * max = 1, not allowed
    CHECK_THROWS_AS(sweep_step(c, st, 0.0), input_error);
    CHECK_THROWS_AS(sweep_step(c, st, -0.5), input_error);
}

TEST_CASE("safe_theta frozen values") {
    CHECK(safe_theta(single_edge()) == Catch::Approx(0.99));
    const SparseCost triangle = complete_graph(3);
    CHECK(safe_theta(triangle) == Catch::Approx(0.495));
    CHECK(safe_theta(triangle) * triangle.max_row_one_norm() == Catch::Approx(0.99));
    CHECK_THROWS_AS(safe_theta(build_cost(3, std::vector<Triple>{})), input_error);
}

TEST_CASE("solve reaches the single-edge optimum from any seed") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 12345ULL}) {
        SolveOptions o;
        o.rank = 2;
        o.tol_rel = 1e-10;
        o.seed = seed;
        const SolveResult r = solve(single_edge(), o);
        CHECK(r.converged);
        CHECK(r.f == Catch::Approx(-2.0).margin(1e-8));
        CHECK(r.y[0] == Catch::Approx(1.0).margin(1e-7));
        CHECK(r.y[1] == Catch::Approx(1.0).margin(1e-7));
    }
}

TEST_CASE("solve reaches the triangle optimum with a certificate") {
    SolveOptions o;
    o.tol_rel = 1e-12;
    o.seed = 3;
    const SolveResult r = solve(complete_graph(3), o);
    CHECK(r.converged);
    CHECK(r.f == Catch::Approx(-3.0).margin(1e-6));
    const Certificate cert = certify(complete_graph(3), r.V, 1e-9);
    CHECK(cert.certified_gap_bound <= 1e-6);
}

TEST_CASE("solve reaches -n on complete graphs at the default rank") {
    for (int n : {4, 7, 12}) {
        SolveOptions o;
        o.tol_rel = 1e-12;
        o.max_sweeps = 20000;
        o.seed = static_cast<std::uint64_t>(n);
        const SolveResult r = solve(complete_graph(n), o);
        CHECK(r.converged);
        CHECK(r.f == Catch::Approx(static_cast<double>(-n)).margin(1e-5));
    }
}

TEST_CASE("solve in step mode matches plain mode at the global optimum") {
    const SparseCost c = random_graph_cost(15, 0.4, 21, false);
    SolveOptions plain;
    plain.tol_rel = 1e-10;
    plain.seed = 9;
    SolveOptions step = plain;
    step.step_size = StepSize::automatic();
    const double f_plain = solve(c, plain).f;
    const double f_step = solve(c, step).f;
    CHECK(std::abs(f_plain - f_step) <= 1e-5 * std::max(1.0, std::abs(f_plain)));
}

TEST_CASE("solve stops at max_sweeps without convergence") {
    SolveOptions o;
    o.tol_rel = 1e-16;
    o.max_sweeps = 3;
    const SolveResult r = solve(random_graph_cost(40, 0.3, 8, false), o);
    CHECK_FALSE(r.converged);
    CHECK(r.sweeps_used == 3);
    CHECK(r.trace.size() == 3);
}

TEST_CASE("solve result invariants: objective recomputed, trace monotone") {
    SolveOptions o;
    o.tol_rel = 1e-8;
    o.seed = 17;
    const SparseCost c = random_graph_cost(30, 0.3, 30, false);
    const SolveResult r = solve(c, o);
    CHECK(std::abs(r.f - objective(c, r.V)) <= 1e-8 * std::max(1.0, std::abs(r.f)));
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].decrease >= -1e-9);
        if (i > 0) {
            CHECK(r.trace[i].sweep == r.trace[i - 1].sweep + 1);
            CHECK(r.trace[i].f <= r.trace[i - 1].f + 1e-9);
        }
    }
    const auto y = dual_vector(c, r.V);
    for (int i = 0; i < c.size(); ++i) CHECK(r.y[i] == Catch::Approx(y[i]).margin(1e-12));
}

TEST_CASE("solve honors trace_every") {
    SolveOptions o;
    o.tol_rel = 1e-10;
    o.trace_every = 5;
    o.seed = 2;
    const SolveResult r = solve(random_graph_cost(25, 0.3, 14, false), o);
    REQUIRE_FALSE(r.trace.empty());
    for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) CHECK(r.trace[i].sweep % 5 == 0);
    CHECK(r.trace.back().sweep == r.sweeps_used);
}

TEST_CASE("fixed_point_residual is zero at the optimum and positive elsewhere") {
    CHECK(fixed_point_residual(single_edge(), FactorMatrix::from_columns({{1, 0}, {-1, 0}})) <=
          1e-10);
    const SparseCost c = random_graph_cost(10, 0.5, 33, false);
    CHECK(fixed_point_residual(c, random_init(10, 5, 0)) > 1e-3);
}

TEST_CASE("fixed_point_residual after a tight solve on K5 is small") {
    const SparseCost c = complete_graph(5);
    SolveOptions o;
    o.tol_rel = 1e-8;
    o.seed = 5;
    const SolveResult r = solve(c, o);
    CHECK(fixed_point_residual(c, r.V) <= 1e-4 * c.frobenius_norm());
}

TEST_CASE("solve records generator and stopping rule metadata") {
    SolveOptions o;
    o.rank = 2;
    const SolveResult r = solve(single_edge(), o);
    CHECK(r.generator == "mt19937-64/box-muller");
    CHECK_FALSE(r.stopping_rule.empty());
}
