#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mixsdp/mixing.hpp"

namespace mixsdp::maxsat {

struct Clause {
    double weight = 1.0;
    std::vector<int> literals; // signed, deduplicated, sorted by variable
    bool hard = false;         // weight >= wcnf top
};

struct Formula {
    int n_vars = 0;
    std::vector<Clause> clauses;
    std::optional<double> top_weight;
    int tautologies_dropped = 0;

    double total_weight() const {
        double w = 0.0;
        for (const auto& cl : clauses) w += cl.weight;
        return w;
    }
};

/// DIMACS CNF / WCNF reader. Clauses are token streams terminated by 0 and
/// may span lines; `c` lines are comments. Repeated literals are
/// deduplicated, tautological clauses dropped and counted.
inline Formula parse_dimacs(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;

    Formula f;
    bool have_header = false;
    bool weighted = false;
    long declared = -1;
    long clause_idx = 0;

    std::vector<std::string> tokens;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "c") continue;
        if (first == "p") {
            if (have_header) throw parse_error("duplicate problem header", line_no);
            std::string kind;
            long nv = -1, nc = -1;
            if (!(ls >> kind >> nv >> nc) || nv < 0 || nc < 0)
                throw parse_error("problem header must be `p cnf n m` or `p wcnf n m [top]`", line_no);
            if (kind == "cnf") {
                weighted = false;
            } else if (kind == "wcnf") {
                weighted = true;
                double top = 0.0;
                if (ls >> top) {
                    if (!(top > 0.0)) throw parse_error("wcnf top weight must be positive", line_no);
                    f.top_weight = top;
                }
            } else {
                throw parse_error("unknown problem kind `" + kind + "`", line_no);
            }
            std::string extra;
            if (ls >> extra) throw parse_error("trailing tokens after problem header", line_no);
            f.n_vars = static_cast<int>(nv);
            declared = nc;
            have_header = true;
            continue;
        }
        if (!have_header) throw parse_error("clause before problem header", line_no);
        tokens.push_back(first);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    if (!have_header) throw parse_error("missing problem header");

    auto to_long = [&](const std::string& s) {
        std::size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(s, &pos);
        } catch (const std::exception&) {
            throw parse_error("bad token `" + s + "` in clause " + std::to_string(clause_idx + 1));
        }
        if (pos != s.size())
            throw parse_error("bad token `" + s + "` in clause " + std::to_string(clause_idx + 1));
        return v;
    };
    auto to_weight = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw parse_error("bad weight `" + s + "` in clause " + std::to_string(clause_idx + 1));
        }
        if (pos != s.size() || !std::isfinite(v))
            throw parse_error("bad weight `" + s + "` in clause " + std::to_string(clause_idx + 1));
        return v;
    };

    std::size_t pos = 0;
    while (pos < tokens.size()) {
        if (clause_idx == declared)
            throw parse_error("more clauses than declared in header");
        Clause cl;
        if (weighted) {
            cl.weight = to_weight(tokens[pos++]);
            if (!(cl.weight > 0.0))
                throw parse_error("clause " + std::to_string(clause_idx + 1) + " has non-positive weight");
            if (pos == tokens.size())
                throw parse_error("clause " + std::to_string(clause_idx + 1) + " has no terminating 0");
        }
        std::vector<int> lits;
        bool terminated = false;
        while (pos < tokens.size()) {
            const long lit = to_long(tokens[pos++]);
            if (lit == 0) {
                terminated = true;
                break;
            }
            if (std::abs(lit) > f.n_vars)
                throw parse_error("literal out of range in clause " + std::to_string(clause_idx + 1));
            lits.push_back(static_cast<int>(lit));
        }
        if (!terminated)
            throw parse_error("clause " + std::to_string(clause_idx + 1) + " has no terminating 0");
        if (lits.empty())
            throw parse_error("empty clause " + std::to_string(clause_idx + 1));
        ++clause_idx;

        std::sort(lits.begin(), lits.end(), [](int a, int b) {
            return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
        });
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        bool tautology = false;
        for (std::size_t t = 1; t < lits.size(); ++t)
            if (lits[t] == -lits[t - 1]) {
                tautology = true;
                break;
            }
        if (tautology) {
            ++f.tautologies_dropped;
            continue;
        }
        cl.literals = std::move(lits);
        cl.hard = f.top_weight && cl.weight >= *f.top_weight;
        f.clauses.push_back(std::move(cl));
    }
    if (clause_idx != declared) throw parse_error("fewer clauses than declared in header");
    return f;
}

struct ClauseTerm {
    int index; // column: 0 = truth variable, i = variable i
    int sign;  // +1 / -1
};

struct SystemClause {
    std::vector<ClauseTerm> terms; // truth term (0, -1) first, then variables
    int length = 0;                // literal count, excluding the truth term
    double weight = 1.0;           // original clause weight
    double solver_weight = 0.0;    // weight / (4 * length)
};

struct Incidence {
    int clause;
    int sign;
};

/// The relaxation's incidence structure over n_vars + 1 columns. Column 0 is
/// the auxiliary truth variable, present in every clause with sign -1. The
/// SDP objective relates to the satisfiability upper bound through
/// `constant_offset`: bound = constant_offset - f.
class ClauseSystem {
public:
    explicit ClauseSystem(const Formula& f) {
        if (f.clauses.empty()) throw input_error("clause system: formula has no clauses");
        n_vars_ = f.n_vars;
        incidence_.resize(static_cast<std::size_t>(n_vars_) + 1);
        total_weight_ = f.total_weight();

        for (const auto& cl : f.clauses) {
            if (cl.literals.empty()) throw input_error("clause system: empty clause");
            if (!(cl.weight > 0.0)) throw input_error("clause system: non-positive clause weight");
            for (int lit : cl.literals)
                if (lit == 0 || std::abs(lit) > f.n_vars)
                    throw input_error("clause system: literal out of range");
            SystemClause sc;
            sc.length = static_cast<int>(cl.literals.size());
            sc.weight = cl.weight;
            sc.solver_weight = cl.weight / (4.0 * sc.length);
            sc.terms.reserve(cl.literals.size() + 1);
            sc.terms.push_back({0, -1});
            for (int lit : cl.literals) sc.terms.push_back({std::abs(lit), lit > 0 ? 1 : -1});
            const int j = static_cast<int>(clauses_.size());
            for (const auto& term : sc.terms)
                incidence_[static_cast<std::size_t>(term.index)].push_back({j, term.sign});
            // diagonal of sum_j w_j s_j s_j' has one w_j per involved column
            diag_weight_sum_ += sc.solver_weight * (sc.length + 1);
            constant_offset_ += cl.weight + sc.solver_weight * (static_cast<double>(sc.length - 1) * (sc.length - 1) -
                                                                (sc.length + 1));
            clauses_.push_back(std::move(sc));
        }
    }

    int n_vars() const { return n_vars_; }
    int cols() const { return n_vars_ + 1; }
    const std::vector<SystemClause>& clauses() const { return clauses_; }
    std::span<const Incidence> incidence(int col) const {
        return {incidence_[static_cast<std::size_t>(col)].data(), incidence_[static_cast<std::size_t>(col)].size()};
    }
    double constant_offset() const { return constant_offset_; }
    double diag_weight_sum() const { return diag_weight_sum_; }
    double total_weight() const { return total_weight_; }

private:
    int n_vars_ = 0;
    std::vector<SystemClause> clauses_;
    std::vector<std::vector<Incidence>> incidence_;
    double constant_offset_ = 0.0;
    double diag_weight_sum_ = 0.0;
    double total_weight_ = 0.0;
};

inline ClauseSystem build_clause_system(const Formula& f) { return ClauseSystem(f); }

/// The zero-diagonal cost matrix sum_j w_j s_j s_j' the incremental sweep
/// implicitly optimizes. Quadratic in clause length; meant for certificates
/// and cross-checks, not for the solve path.
inline SparseCost materialize_cost(const ClauseSystem& cs) {
    std::vector<Triple> triples;
    for (const auto& sc : cs.clauses())
        for (std::size_t a = 0; a < sc.terms.size(); ++a)
            for (std::size_t b = a + 1; b < sc.terms.size(); ++b)
                triples.push_back({sc.terms[a].index, sc.terms[b].index,
                                   sc.solver_weight * sc.terms[a].sign * sc.terms[b].sign});
    return build_cost(cs.cols(), triples);
}

/// Solver state: the factor V (column 0 = truth) plus the clause embeddings
/// z_j = V s_j, maintained incrementally and refreshed from scratch every
/// kZRefreshInterval sweeps to cap floating-point drift.
struct MaxsatState {
    FactorMatrix V;
    std::vector<double> z; // m contiguous vectors of length k
    std::vector<double> g_scratch;
    std::vector<double> y_scratch;
    int sweeps_since_refresh = 0;

    std::span<double> clause_embedding(int j, int k) {
        return {z.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(k),
                static_cast<std::size_t>(k)};
    }
    std::span<const double> clause_embedding(int j, int k) const {
        return {z.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(k),
                static_cast<std::size_t>(k)};
    }
};

inline constexpr int kZRefreshInterval = 100;

inline void refresh_embeddings(const ClauseSystem& cs, MaxsatState& state) {
    const int k = state.V.rank();
    std::fill(state.z.begin(), state.z.end(), 0.0);
    for (std::size_t j = 0; j < cs.clauses().size(); ++j) {
        auto zj = state.clause_embedding(static_cast<int>(j), k);
        for (const auto& term : cs.clauses()[j].terms) {
            const auto vi = state.V.column(term.index);
            for (int t = 0; t < k; ++t) zj[static_cast<std::size_t>(t)] += term.sign * vi[static_cast<std::size_t>(t)];
        }
    }
    state.sweeps_since_refresh = 0;
}

inline MaxsatState make_state(const ClauseSystem& cs, FactorMatrix v) {
    if (v.cols() != cs.cols()) throw input_error("maxsat state: dimension mismatch");
    MaxsatState state{std::move(v), {}, {}, {}, 0};
    state.z.assign(cs.clauses().size() * static_cast<std::size_t>(state.V.rank()), 0.0);
    state.g_scratch.assign(static_cast<std::size_t>(state.V.rank()), 0.0);
    state.y_scratch.assign(static_cast<std::size_t>(cs.cols()), 0.0);
    refresh_embeddings(cs, state);
    return state;
}

/// SDP objective of the zero-diagonal cost, computed from the embeddings:
/// f = sum_j w_j ||z_j||^2 - sum_j w_j (L_j + 1).
inline double sdp_objective(const ClauseSystem& cs, const MaxsatState& state) {
    const int k = state.V.rank();
    double f = 0.0;
    for (std::size_t j = 0; j < cs.clauses().size(); ++j) {
        const auto zj = state.clause_embedding(static_cast<int>(j), k);
        f += cs.clauses()[j].solver_weight * detail::vec_dot(zj, zj);
    }
    return f - cs.diag_weight_sum();
}

/// Upper bound on the optimum satisfied weight at the current embedding:
/// sum_j weight_j * (1 - (||z_j||^2 - (L_j - 1)^2) / (4 L_j)).
inline double sat_upper_bound(const ClauseSystem& cs, const MaxsatState& state) {
    const int k = state.V.rank();
    double bound = 0.0;
    for (std::size_t j = 0; j < cs.clauses().size(); ++j) {
        const auto& sc = cs.clauses()[j];
        const auto zj = state.clause_embedding(static_cast<int>(j), k);
        const double lm1 = sc.length - 1;
        bound += sc.weight * (1.0 - (detail::vec_dot(zj, zj) - lm1 * lm1) / (4.0 * sc.length));
    }
    return bound;
}

/// One cyclic pass over the variable columns 1..n (column 0 is pinned).
/// Each update removes v_i from its incident embeddings, remixes
/// v_i := normalize(-sum_j w_j s_ij z_j) under the usual degeneracy guard,
/// and adds the new column back. Equivalent to the generic sweep on the
/// materialized cost matrix, in O(k * literals) per pass.
inline SweepReport maxsat_sweep(const ClauseSystem& cs, MaxsatState& state,
                                double delta = 1e-12) {
    if (state.V.cols() != cs.cols()) throw input_error("maxsat_sweep: dimension mismatch");
    const int k = state.V.rank();
    if (state.sweeps_since_refresh >= kZRefreshInterval) refresh_embeddings(cs, state);

    SweepReport rep;
    rep.f_before = sdp_objective(cs, state);
    double rhs = 0.0;

    std::span<double> g(state.g_scratch.data(), static_cast<std::size_t>(k));
    for (int i = 1; i <= cs.n_vars(); ++i) {
        auto vi = state.V.column(i);
        std::fill(g.begin(), g.end(), 0.0);
        for (const auto& inc : cs.incidence(i)) {
            auto zj = state.clause_embedding(inc.clause, k);
            const double w = cs.clauses()[static_cast<std::size_t>(inc.clause)].solver_weight;
            for (int t = 0; t < k; ++t) {
                zj[static_cast<std::size_t>(t)] -= inc.sign * vi[static_cast<std::size_t>(t)];
                g[static_cast<std::size_t>(t)] += w * inc.sign * zj[static_cast<std::size_t>(t)];
            }
        }
        const double y = detail::vec_norm(g);
        state.y_scratch[static_cast<std::size_t>(i)] = y;
        if (y >= delta) {
            double diff_sq = 0.0;
            for (int t = 0; t < k; ++t) {
                const double updated = -g[static_cast<std::size_t>(t)] / y;
                const double d = vi[static_cast<std::size_t>(t)] - updated;
                diff_sq += d * d;
                vi[static_cast<std::size_t>(t)] = updated;
            }
            rhs += y * diff_sq;
        } else {
            ++rep.degenerate_hits;
            rep.degenerate_indices.push_back(i);
        }
        for (const auto& inc : cs.incidence(i)) {
            auto zj = state.clause_embedding(inc.clause, k);
            for (int t = 0; t < k; ++t) zj[static_cast<std::size_t>(t)] += inc.sign * vi[static_cast<std::size_t>(t)];
        }
    }
    ++state.sweeps_since_refresh;

    rep.f_after = sdp_objective(cs, state);
    rep.identity_lhs = rep.f_before - rep.f_after;
    rep.identity_rhs = rhs;
    return rep;
}

/// Exit-time normalizers y_i = ||V c_i|| of the materialized cost, computed
/// from the embeddings without forming the matrix.
inline std::vector<double> dual_vector(const ClauseSystem& cs, const MaxsatState& state) {
    const int k = state.V.rank();
    std::vector<double> y(static_cast<std::size_t>(cs.cols()), 0.0);
    std::vector<double> acc(static_cast<std::size_t>(k));
    for (int i = 0; i < cs.cols(); ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        double self_weight = 0.0;
        for (const auto& inc : cs.incidence(i)) {
            const double w = cs.clauses()[static_cast<std::size_t>(inc.clause)].solver_weight;
            const auto zj = state.clause_embedding(inc.clause, k);
            for (int t = 0; t < k; ++t) acc[static_cast<std::size_t>(t)] += w * inc.sign * zj[static_cast<std::size_t>(t)];
            self_weight += w;
        }
        const auto vi = state.V.column(i);
        double norm_sq = 0.0;
        for (int t = 0; t < k; ++t) {
            const double r = acc[static_cast<std::size_t>(t)] - self_weight * vi[static_cast<std::size_t>(t)];
            norm_sq += r * r;
        }
        y[static_cast<std::size_t>(i)] = std::sqrt(norm_sq);
    }
    return y;
}

/// Full relaxation solve with the incremental sweep. Same stopping rule and
/// options as the generic solver; the step-size variant is not available
/// here (the specialized update has no step-size form).
inline SolveResult solve(const ClauseSystem& cs, const SolveOptions& opts) {
    validate(opts);
    if (opts.step_size.mode != StepSize::Mode::none)
        throw input_error("maxsat solve: step-size mode is not supported");
    const int n = cs.cols();
    const int k = opts.rank == SolveOptions::kAutoRank ? default_rank(n) : opts.rank;

    MaxsatState state = make_state(cs, random_init(n, k, opts.seed));
    const double f0 = sdp_objective(cs, state);
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
        const SweepReport rep = maxsat_sweep(cs, state, opts.degeneracy_delta);
        ++sweeps;
        degenerate.insert(rep.degenerate_indices.begin(), rep.degenerate_indices.end());
        f_cur = rep.f_after;
        last_decrease = f_prev - f_cur;
        if (sweeps % opts.trace_every == 0)
            res.trace.push_back({sweeps, f_cur, last_decrease, elapsed()});
        converged = mixsdp::detail::sweep_converged(f0, f_cur, last_decrease, opts.tol_rel);
        f_prev = f_cur;
    }
    if (sweeps % opts.trace_every != 0)
        res.trace.push_back({sweeps, f_cur, last_decrease, elapsed()});

    refresh_embeddings(cs, state);
    res.f = sdp_objective(cs, state);
    res.y = dual_vector(cs, state);
    res.V = std::move(state.V);
    res.sweeps_used = sweeps;
    res.converged = converged;
    res.degenerate_columns.assign(degenerate.begin(), degenerate.end());
    return res;
}

struct BoolAssignment {
    std::vector<bool> values;
    double satisfied_weight = 0.0;
};

inline bool clause_satisfied(const Clause& cl, const std::vector<bool>& values) {
    for (int lit : cl.literals) {
        const bool val = values[static_cast<std::size_t>(std::abs(lit) - 1)];
        if (lit > 0 ? val : !val) return true;
    }
    return false;
}

inline double satisfied_weight(const Formula& f, const std::vector<bool>& values) {
    double w = 0.0;
    for (const auto& cl : f.clauses)
        if (clause_satisfied(cl, values)) w += cl.weight;
    return w;
}

inline int hard_violations(const Formula& f, const std::vector<bool>& values) {
    int count = 0;
    for (const auto& cl : f.clauses)
        if (cl.hard && !clause_satisfied(cl, values)) ++count;
    return count;
}

/// Truth-direction rounding: variable i is true when it lands on the truth
/// column's side of the hyperplane with normal r; sign(0) counts as +1.
inline BoolAssignment round_assignment(const Formula& f, const MaxsatState& state,
                                       std::span<const double> r) {
    if (state.V.cols() != f.n_vars + 1) throw input_error("round_assignment: dimension mismatch");
    if (static_cast<int>(r.size()) != state.V.rank())
        throw input_error("round_assignment: direction has wrong length");
    BoolAssignment a;
    a.values.resize(static_cast<std::size_t>(f.n_vars));
    const bool truth_side = detail::vec_dot(r, state.V.column(0)) >= 0.0;
    for (int i = 1; i <= f.n_vars; ++i) {
        const bool side = detail::vec_dot(r, state.V.column(i)) >= 0.0;
        a.values[static_cast<std::size_t>(i - 1)] = side == truth_side;
    }
    a.satisfied_weight = satisfied_weight(f, a.values);
    return a;
}

/// Best of `trials` random roundings plus the deterministic r = v_0
/// direction, which is always evaluated first.
inline BoolAssignment best_rounding(const Formula& f, const MaxsatState& state, int trials,
                                    std::uint64_t seed) {
    if (trials < 1) throw input_error("best_rounding: trials must be positive");
    const int k = state.V.rank();
    std::vector<double> r(state.V.column(0).begin(), state.V.column(0).end());
    BoolAssignment best = round_assignment(f, state, r);
    for (int t = 0; t < trials; ++t) {
        GaussianRng rng(substream_seed(seed, static_cast<std::uint64_t>(t)));
        random_unit_vector(std::span<double>(r.data(), static_cast<std::size_t>(k)), rng);
        BoolAssignment cand = round_assignment(f, state, r);
        if (cand.satisfied_weight > best.satisfied_weight) best = std::move(cand);
    }
    return best;
}

} // namespace mixsdp::maxsat
