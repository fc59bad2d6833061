#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mixsdp/error.hpp"
#include "mixsdp/factor_matrix.hpp"
#include "mixsdp/sparse_cost.hpp"

namespace mixsdp {

/// f(V) = <C, V^T V>; every undirected pair is counted twice, matching the
/// matrix inner product.
inline double objective(const SparseCost& c, const FactorMatrix& v) {
    if (v.cols() != c.size()) throw input_error("objective: dimension mismatch");
    double f = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        const auto vi = v.column(i);
        for (const auto& e : c.row(i)) f += e.value * detail::vec_dot(vi, v.column(e.col));
    }
    return f;
}

/// Smallest rank that recovers the full SDP optimum: min(n, ceil(sqrt(2n)) + 1).
inline int default_rank(int n) {
    if (n < 1) throw input_error("default_rank: n must be positive");
    auto r = static_cast<long long>(std::ceil(std::sqrt(2.0 * n)));
    while (r * r < 2LL * n) ++r;       // guard against sqrt rounding down
    while ((r - 1) * (r - 1) >= 2LL * n) --r;
    return static_cast<int>(std::min<long long>(n, r + 1));
}

struct StepSize {
    enum class Mode { none, automatic, fixed };
    Mode mode = Mode::none;
    double value = 0.0;

    static StepSize none() { return {}; }
    static StepSize automatic() { return {Mode::automatic, 0.0}; }
    static StepSize fixed(double theta) { return {Mode::fixed, theta}; }
};

struct SolveOptions {
    static constexpr int kAutoRank = 0;

    int rank = kAutoRank;            // 0 = pick default_rank(n)
    double tol_rel = 1e-4;
    int max_sweeps = 10000;
    StepSize step_size = StepSize::none();
    std::uint64_t seed = 0;
    double degeneracy_delta = 1e-12;
    int trace_every = 1;
};

inline void validate(const SolveOptions& o) {
    if (o.rank < 0) throw input_error("options: rank must be positive or auto");
    if (!(o.tol_rel > 0.0)) throw input_error("options: tol_rel must be > 0");
    if (o.max_sweeps < 1) throw input_error("options: max_sweeps must be positive");
    if (o.step_size.mode == StepSize::Mode::fixed && !(o.step_size.value > 0.0))
        throw input_error("options: step size must be > 0");
    if (!(o.degeneracy_delta > 0.0)) throw input_error("options: degeneracy_delta must be > 0");
    if (o.trace_every < 1) throw input_error("options: trace_every must be positive");
}

struct TraceRecord {
    int sweep;
    double f;
    double decrease;  // f before this sweep minus f after
    double elapsed_s; // since solve start
};

struct SolveResult {
    FactorMatrix V;
    double f = 0.0;                      // final objective, recomputed
    std::vector<double> y;               // ||V c_i|| at exit
    int sweeps_used = 0;
    bool converged = false;
    std::vector<int> degenerate_columns; // indices where the guard ever fired
    std::vector<TraceRecord> trace;
    std::string generator;               // RNG algorithm used for init
    std::string stopping_rule;
};

} // namespace mixsdp
