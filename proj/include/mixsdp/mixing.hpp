#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <vector>

#include "mixsdp/core.hpp"

namespace mixsdp {

/// Working state for the cyclic sweeps. V is updated in place column by
/// column; y_scratch[i] holds the normalizer used for column i during the
/// most recent sweep that visited it.
struct MixingState {
    FactorMatrix V;
    std::vector<double> g_scratch;
    std::vector<double> y_scratch;

    explicit MixingState(FactorMatrix v)
        : V(std::move(v)),
          g_scratch(static_cast<std::size_t>(V.rank()), 0.0),
          y_scratch(static_cast<std::size_t>(V.cols()), 0.0) {}
};

struct SweepReport {
    double f_before = 0.0;
    double f_after = 0.0;
    double identity_lhs = 0.0; // f_before - f_after
    double identity_rhs = 0.0; // sum of the per-column decrease terms
    int degenerate_hits = 0;
    std::vector<int> degenerate_indices;
};

/// One cyclic pass of v_i := normalize(-sum_j c_ij v_j) for i in
/// [first_column, n), each update seeing the columns already updated this
/// sweep. Columns whose pre-normalization vector falls below `delta` are
/// left unchanged and counted. The report carries both sides of the exact
/// decrease identity f(V) - f(V^) = sum_i y_i ||v_i - v^_i||^2.
inline SweepReport sweep(const SparseCost& c, MixingState& state, double delta,
                         int first_column = 0) {
    FactorMatrix& v = state.V;
    const int n = c.size();
    if (v.cols() != n) throw input_error("sweep: dimension mismatch");
    if (first_column < 0 || first_column > n) throw input_error("sweep: bad first column");
    const int k = v.rank();

    SweepReport rep;
    rep.f_before = objective(c, v);
    double rhs = 0.0;

    std::span<double> g(state.g_scratch.data(), static_cast<std::size_t>(k));
    for (int i = first_column; i < n; ++i) {
        std::fill(g.begin(), g.end(), 0.0);
        for (const auto& e : c.row(i)) {
            const auto vj = v.column(e.col);
            for (int t = 0; t < k; ++t) g[static_cast<std::size_t>(t)] += e.value * vj[static_cast<std::size_t>(t)];
        }
        const double y = detail::vec_norm(g);
        state.y_scratch[static_cast<std::size_t>(i)] = y;
        if (y < delta) {
            ++rep.degenerate_hits;
            rep.degenerate_indices.push_back(i);
            continue;
        }
        auto vi = v.column(i);
        double diff_sq = 0.0;
        for (int t = 0; t < k; ++t) {
            const double updated = -g[static_cast<std::size_t>(t)] / y;
            const double d = vi[static_cast<std::size_t>(t)] - updated;
            diff_sq += d * d;
            vi[static_cast<std::size_t>(t)] = updated;
        }
        rhs += y * diff_sq;
    }

    rep.f_after = objective(c, v);
    rep.identity_lhs = rep.f_before - rep.f_after;
    rep.identity_rhs = rhs;
    return rep;
}

/// Step-size variant: v_i := normalize(v_i - theta * sum_j c_ij v_j) with
/// theta in (0, 1/max_i ||c_i||_1). The pre-normalization norm is at least
/// 1 - theta * ||c_i||_1 > 0, so no degeneracy guard is needed. Decrease
/// identity: f(V) - f(V^) = sum_i (1 + y_i)/theta * ||v_i - v^_i||^2.
inline SweepReport sweep_step(const SparseCost& c, MixingState& state, double theta) {
    FactorMatrix& v = state.V;
    const int n = c.size();
    if (v.cols() != n) throw input_error("sweep_step: dimension mismatch");
    if (!(theta > 0.0) || theta * c.max_row_one_norm() >= 1.0)
        throw input_error("sweep_step: theta outside (0, 1/max_i ||c_i||_1)");
    const int k = v.rank();

    SweepReport rep;
    rep.f_before = objective(c, v);
    double rhs = 0.0;

    std::span<double> g(state.g_scratch.data(), static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        std::fill(g.begin(), g.end(), 0.0);
        for (const auto& e : c.row(i)) {
            const auto vj = v.column(e.col);
            for (int t = 0; t < k; ++t) g[static_cast<std::size_t>(t)] += e.value * vj[static_cast<std::size_t>(t)];
        }
        auto vi = v.column(i);
        double norm_sq = 0.0;
        for (int t = 0; t < k; ++t) {
            g[static_cast<std::size_t>(t)] = vi[static_cast<std::size_t>(t)] - theta * g[static_cast<std::size_t>(t)];
            norm_sq += g[static_cast<std::size_t>(t)] * g[static_cast<std::size_t>(t)];
        }
        const double y = std::sqrt(norm_sq);
        state.y_scratch[static_cast<std::size_t>(i)] = y;
        double diff_sq = 0.0;
        for (int t = 0; t < k; ++t) {
            const double updated = g[static_cast<std::size_t>(t)] / y;
            const double d = vi[static_cast<std::size_t>(t)] - updated;
            diff_sq += d * d;
            vi[static_cast<std::size_t>(t)] = updated;
        }
        rhs += (1.0 + y) / theta * diff_sq;
    }

    rep.f_after = objective(c, v);
    rep.identity_lhs = rep.f_before - rep.f_after;
    rep.identity_rhs = rhs;
    return rep;
}

/// Largest round step size inside the guaranteed-progress interval:
/// 0.99 / max_i ||c_i||_1.
inline double safe_theta(const SparseCost& c) {
    const double m = c.max_row_one_norm();
    if (!(m > 0.0)) throw input_error("safe_theta: cost matrix has no nonzero entry");
    return 0.99 / m;
}

/// Normalizer vector y_i = ||V c_i||. At a critical point this is the dual
/// vector of the unit-diagonal SDP.
inline std::vector<double> dual_vector(const SparseCost& c, const FactorMatrix& v) {
    if (v.cols() != c.size()) throw input_error("dual_vector: dimension mismatch");
    const int k = v.rank();
    std::vector<double> y(static_cast<std::size_t>(c.size()), 0.0);
    std::vector<double> acc(static_cast<std::size_t>(k));
    for (int i = 0; i < c.size(); ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const auto& e : c.row(i)) {
            const auto vj = v.column(e.col);
            for (int t = 0; t < k; ++t) acc[static_cast<std::size_t>(t)] += e.value * vj[static_cast<std::size_t>(t)];
        }
        y[static_cast<std::size_t>(i)] = detail::vec_norm(acc);
    }
    return y;
}

/// First-order criticality residual ||V (C + diag(y))|| with y_i = ||V c_i||,
/// in the generalized L2 (Frobenius) norm. Zero exactly at critical points.
inline double fixed_point_residual(const SparseCost& c, const FactorMatrix& v) {
    if (v.cols() != c.size()) throw input_error("fixed_point_residual: dimension mismatch");
    const int k = v.rank();
    std::vector<double> acc(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const auto& e : c.row(i)) {
            const auto vj = v.column(e.col);
            for (int t = 0; t < k; ++t) acc[static_cast<std::size_t>(t)] += e.value * vj[static_cast<std::size_t>(t)];
        }
        const double y = detail::vec_norm(acc);
        const auto vi = v.column(i);
        for (int t = 0; t < k; ++t) {
            const double r = acc[static_cast<std::size_t>(t)] + y * vi[static_cast<std::size_t>(t)];
            total += r * r;
        }
    }
    return std::sqrt(total);
}

namespace detail {

/// Stopping rule shared by the generic and the clause-system solvers:
/// stop once the per-sweep decrease drops to tol_rel times the total
/// decrease so far, with an absolute fallback when nothing moved at all.
inline bool sweep_converged(double f0, double f_cur, double decrease, double tol_rel) {
    const double total = f0 - f_cur;
    if (total > 0.0) return decrease <= tol_rel * total;
    return decrease <= tol_rel;
}

constexpr const char* kStoppingRuleName = "sweep_decrease<=tol_rel*(f0-f_cur)";

} // namespace detail

/// Full solve: random unit-sphere init, cyclic sweeps (plain or step-size
/// variant), stop when the per-sweep decrease falls below tol_rel times the
/// decrease accumulated since the start, or after max_sweeps.
inline SolveResult solve(const SparseCost& c, const SolveOptions& opts) {
    validate(opts);
    const int n = c.size();
    if (n < 1) throw input_error("solve: empty problem");
    const int k = opts.rank == SolveOptions::kAutoRank ? default_rank(n) : opts.rank;

    bool use_step = false;
    double theta = 0.0;
    if (opts.step_size.mode == StepSize::Mode::automatic) {
        use_step = true;
        theta = safe_theta(c);
    } else if (opts.step_size.mode == StepSize::Mode::fixed) {
        use_step = true;
        theta = opts.step_size.value;
        if (theta * c.max_row_one_norm() >= 1.0)
            throw input_error("solve: step size must satisfy theta*max_i||c_i||_1 < 1");
    }

    MixingState state(random_init(n, k, opts.seed));
    const double f0 = objective(c, state.V);
    double f_prev = f0;

    SolveResult res;
    res.generator = GaussianRng::name();
    res.stopping_rule = detail::kStoppingRuleName;

    std::set<int> degenerate;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    int sweeps = 0;
    double f_cur = f0;
    double last_decrease = 0.0;
    bool converged = false;
    while (sweeps < opts.max_sweeps && !converged) {
        const SweepReport rep = use_step ? sweep_step(c, state, theta)
                                         : sweep(c, state, opts.degeneracy_delta);
        ++sweeps;
        degenerate.insert(rep.degenerate_indices.begin(), rep.degenerate_indices.end());
        f_cur = rep.f_after;
        last_decrease = f_prev - f_cur;
        if (sweeps % opts.trace_every == 0)
            res.trace.push_back({sweeps, f_cur, last_decrease, elapsed()});
        converged = detail::sweep_converged(f0, f_cur, last_decrease, opts.tol_rel);
        f_prev = f_cur;
    }
    if (sweeps % opts.trace_every != 0)
        res.trace.push_back({sweeps, f_cur, last_decrease, elapsed()});

    res.V = std::move(state.V);
    res.f = objective(c, res.V);
    res.y = dual_vector(c, res.V);
    res.sweeps_used = sweeps;
    res.converged = converged;
    res.degenerate_columns.assign(degenerate.begin(), degenerate.end());
    return res;
}

} // namespace mixsdp
