#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mixsdp/core.hpp"
#include "mixsdp/rng.hpp"

namespace mixsdp::maxcut {

struct Edge {
    int u;
    int v;
    double w;
};

struct Graph {
    int n = 0;
    std::vector<Edge> edges; // u < v, no duplicates, sorted
    double total_weight = 0.0;
    int self_loops_dropped = 0;
    bool has_negative_weight = false;
};

/// Parses the rudy/Gset-style format: first non-comment line `n m`, then m
/// lines `u v w` (w optional, default 1), 1-indexed. Duplicate edges are
/// summed, self-loops dropped with a count.
inline Graph parse_graph(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;

    long n = -1, m = -1;
    long seen = 0;
    Graph g;
    std::map<std::pair<int, int>, double> merged;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_comment_or_blank(line)) continue;
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n >> m) || n < 1 || m < 0)
                throw parse_error("graph header must be `n m`", line_no);
            std::string extra;
            if (ls >> extra) throw parse_error("trailing tokens after graph header", line_no);
            continue;
        }
        if (seen == m) throw parse_error("more edges than declared in header", line_no);
        long u = 0, v = 0;
        double w = 1.0;
        if (!(ls >> u >> v)) throw parse_error("expected `u v [w]`", line_no);
        if (!(ls >> w)) {
            w = 1.0;
        } else {
            std::string extra;
            if (ls >> extra) throw parse_error("trailing tokens after edge", line_no);
        }
        if (u < 1 || u > n || v < 1 || v > n)
            throw parse_error("vertex index out of range", line_no);
        if (!std::isfinite(w)) throw parse_error("non-finite edge weight", line_no);
        ++seen;
        if (u == v) {
            ++g.self_loops_dropped;
            continue;
        }
        const int a = static_cast<int>(std::min(u, v)) - 1;
        const int b = static_cast<int>(std::max(u, v)) - 1;
        merged[{a, b}] += w;
    }
    if (n < 0) throw parse_error("missing graph header");
    if (seen != m) throw parse_error("fewer edges than declared in header");

    g.n = static_cast<int>(n);
    g.edges.reserve(merged.size());
    for (const auto& [key, w] : merged) {
        g.edges.push_back({key.first, key.second, w});
        g.total_weight += w;
        if (w < 0.0) g.has_negative_weight = true;
    }
    return g;
}

/// C has c_uv = c_vu = w for each edge; minimizing <C, V'V> over the sphere
/// maximizes the relaxed cut.
inline SparseCost graph_to_cost(const Graph& g) {
    std::vector<Triple> triples;
    triples.reserve(g.edges.size());
    for (const auto& e : g.edges) triples.push_back({e.u, e.v, e.w});
    return build_cost(g.n, triples);
}

/// Upper bound on the maximum cut from the SDP objective value f:
/// W/2 - f/4 (exact bound when f is the SDP optimum).
inline double sdp_cut_bound(const Graph& g, double f) {
    return g.total_weight / 2.0 - f / 4.0;
}

struct CutAssignment {
    std::vector<int> signs; // +1 / -1 per vertex
    double value = 0.0;
};

inline double cut_value(const Graph& g, std::span<const int> signs) {
    double v = 0.0;
    for (const auto& e : g.edges)
        if (signs[static_cast<std::size_t>(e.u)] != signs[static_cast<std::size_t>(e.v)]) v += e.w;
    return v;
}

/// Hyperplane rounding: vertex i goes to side sign(r'v_i), with sign(0)
/// mapped to +1.
inline CutAssignment round_cut(const Graph& g, const FactorMatrix& v, std::span<const double> r) {
    if (v.cols() != g.n) throw input_error("round_cut: dimension mismatch");
    if (static_cast<int>(r.size()) != v.rank()) throw input_error("round_cut: direction has wrong length");
    CutAssignment cut;
    cut.signs.resize(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i)
        cut.signs[static_cast<std::size_t>(i)] = detail::vec_dot(r, v.column(i)) < 0.0 ? -1 : 1;
    cut.value = cut_value(g, cut.signs);
    return cut;
}

/// Best of `trials` independent roundings. Trial t draws its direction from
/// substream t of `seed`, so a prefix of trials always sees the same
/// directions regardless of how the trials are scheduled.
inline CutAssignment best_rounding(const Graph& g, const FactorMatrix& v, int trials,
                                   std::uint64_t seed) {
    if (trials < 1) throw input_error("best_rounding: trials must be positive");
    std::vector<double> r(static_cast<std::size_t>(v.rank()));
    CutAssignment best;
    for (int t = 0; t < trials; ++t) {
        GaussianRng rng(substream_seed(seed, static_cast<std::uint64_t>(t)));
        random_unit_vector(r, rng);
        CutAssignment cand = round_cut(g, v, r);
        if (t == 0 || cand.value > best.value) best = std::move(cand);
    }
    return best;
}

} // namespace mixsdp::maxcut
