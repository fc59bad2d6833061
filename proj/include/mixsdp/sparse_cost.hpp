#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mixsdp/error.hpp"

namespace mixsdp {

struct CostEntry {
    int col;
    double value;
};

struct Triple {
    int row;
    int col;
    double value;
};

/// Symmetric sparse cost matrix with zero diagonal, stored as row lists of
/// (column, value) pairs sorted by column. Symmetry means row i doubles as
/// column i, which is what the cyclic sweep traverses.
class SparseCost {
public:
    SparseCost() = default;

    int size() const { return n_; }
    std::size_t nnz() const { return nnz_; }
    bool empty() const { return nnz_ == 0; }
    int dropped_diagonal() const { return dropped_diagonal_; }

    std::span<const CostEntry> row(int i) const {
        return {rows_[static_cast<std::size_t>(i)].data(), rows_[static_cast<std::size_t>(i)].size()};
    }

    double row_one_norm(int i) const { return row_one_norms_[static_cast<std::size_t>(i)]; }

    double max_row_one_norm() const {
        double m = 0.0;
        for (double x : row_one_norms_) m = std::max(m, x);
        return m;
    }

    /// Frobenius norm of the stored matrix.
    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& r : rows_)
            for (const auto& e : r) s += e.value * e.value;
        return std::sqrt(s);
    }

    /// Upper-triangle triples (i < j), row-major sorted. Rebuilding from
    /// these reproduces the structure exactly.
    std::vector<Triple> export_entries() const {
        std::vector<Triple> out;
        out.reserve(nnz_ / 2);
        for (int i = 0; i < n_; ++i)
            for (const auto& e : rows_[static_cast<std::size_t>(i)])
                if (e.col > i) out.push_back({i, e.col, e.value});
        return out;
    }

private:
    friend SparseCost build_cost(int n, std::span<const Triple> entries);

    int n_ = 0;
    std::size_t nnz_ = 0;
    int dropped_diagonal_ = 0;
    std::vector<std::vector<CostEntry>> rows_;
    std::vector<double> row_one_norms_;
};

/// Builds the symmetric zero-diagonal cost matrix from raw (i, j, w) triples.
/// Duplicate pairs are summed, diagonal entries dropped (and counted),
/// and each undirected pair is stored in both rows.
inline SparseCost build_cost(int n, std::span<const Triple> entries) {
    if (n < 1) throw input_error("build_cost: n must be positive");
    SparseCost c;
    c.n_ = n;
    c.rows_.resize(static_cast<std::size_t>(n));
    c.row_one_norms_.assign(static_cast<std::size_t>(n), 0.0);

    std::map<std::pair<int, int>, double> pairs;
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw input_error("build_cost: index out of range");
        if (!std::isfinite(t.value))
            throw input_error("build_cost: non-finite weight");
        if (t.row == t.col) {
            ++c.dropped_diagonal_;
            continue;
        }
        pairs[{std::min(t.row, t.col), std::max(t.row, t.col)}] += t.value;
    }

    for (const auto& [key, w] : pairs) {
        c.rows_[static_cast<std::size_t>(key.first)].push_back({key.second, w});
        c.rows_[static_cast<std::size_t>(key.second)].push_back({key.first, w});
    }
    for (int i = 0; i < n; ++i) {
        auto& r = c.rows_[static_cast<std::size_t>(i)];
        std::sort(r.begin(), r.end(), [](const CostEntry& a, const CostEntry& b) { return a.col < b.col; });
        double norm1 = 0.0;
        for (const auto& e : r) norm1 += std::abs(e.value);
        c.row_one_norms_[static_cast<std::size_t>(i)] = norm1;
        c.nnz_ += r.size();
    }
    return c;
}

inline SparseCost build_cost(int n, const std::vector<Triple>& entries) {
    return build_cost(n, std::span<const Triple>(entries.data(), entries.size()));
}

namespace detail {

inline bool is_comment_or_blank(std::string_view line) {
    for (char ch : line) {
        if (ch == ' ' || ch == '\t' || ch == '\r') continue;
        return ch == '#' || ch == '%';
    }
    return true;
}

} // namespace detail

/// Parses the plain-text cost format: first line `n nnz`, then one
/// `i j w` entry per line, 1-indexed; `#` and `%` lines are comments.
/// Only i<j pairs are required, symmetrization is implied.
inline SparseCost parse_cost_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;

    long n = -1, declared = -1;
    std::vector<Triple> triples;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_comment_or_blank(line)) continue;
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n >> declared) || n < 1 || declared < 0)
                throw parse_error("cost header must be `n nnz`", line_no);
            std::string extra;
            if (ls >> extra) throw parse_error("trailing tokens after cost header", line_no);
            triples.reserve(static_cast<std::size_t>(declared));
            continue;
        }
        if (static_cast<long>(triples.size()) == declared)
            throw parse_error("more entries than declared in header", line_no);
        long i = 0, j = 0;
        double w = 0.0;
        if (!(ls >> i >> j >> w)) throw parse_error("expected `i j w`", line_no);
        std::string extra;
        if (ls >> extra) throw parse_error("trailing tokens after entry", line_no);
        if (i < 1 || i > n || j < 1 || j > n)
            throw parse_error("vertex index out of range", line_no);
        triples.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), w});
    }
    if (n < 0) throw parse_error("missing cost header");
    if (static_cast<long>(triples.size()) != declared)
        throw parse_error("fewer entries than declared in header");
    return build_cost(static_cast<int>(n), triples);
}

/// Inverse of parse_cost_text for the upper triangle.
inline std::string format_cost_text(const SparseCost& c) {
    const auto triples = c.export_entries();
    std::ostringstream out;
    out.precision(17);
    out << c.size() << ' ' << triples.size() << '\n';
    for (const auto& t : triples)
        out << (t.row + 1) << ' ' << (t.col + 1) << ' ' << t.value << '\n';
    return out.str();
}

} // namespace mixsdp
