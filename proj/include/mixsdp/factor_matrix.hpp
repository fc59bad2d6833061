#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mixsdp/error.hpp"
#include "mixsdp/rng.hpp"

namespace mixsdp {

namespace detail {

inline double vec_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
    return s;
}

inline double vec_norm(std::span<const double> a) { return std::sqrt(vec_dot(a, a)); }

} // namespace detail

/// k x n factor whose columns live on the unit sphere. Column-major storage,
/// so one column is one contiguous span.
class FactorMatrix {
public:
    FactorMatrix() = default;

    FactorMatrix(int k, int n)
        : k_(k), n_(n), data_(static_cast<std::size_t>(k) * static_cast<std::size_t>(n), 0.0) {
        if (k < 1 || n < 1) throw input_error("FactorMatrix: k and n must be positive");
    }

    static FactorMatrix from_columns(const std::vector<std::vector<double>>& cols) {
        if (cols.empty() || cols.front().empty())
            throw input_error("FactorMatrix: empty column list");
        FactorMatrix m(static_cast<int>(cols.front().size()), static_cast<int>(cols.size()));
        for (int i = 0; i < m.n_; ++i) {
            if (static_cast<int>(cols[static_cast<std::size_t>(i)].size()) != m.k_)
                throw input_error("FactorMatrix: ragged column list");
            auto dst = m.column(i);
            for (int t = 0; t < m.k_; ++t) dst[static_cast<std::size_t>(t)] = cols[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
        }
        return m;
    }

    int rank() const { return k_; }
    int cols() const { return n_; }

    std::span<double> column(int i) {
        return {data_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(k_),
                static_cast<std::size_t>(k_)};
    }
    std::span<const double> column(int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(k_),
                static_cast<std::size_t>(k_)};
    }

    double column_dot(int i, int j) const { return detail::vec_dot(column(i), column(j)); }
    double column_norm(int i) const { return detail::vec_norm(column(i)); }

    /// max_i | ||v_i|| - 1 |, the feasibility defect.
    double max_norm_defect() const {
        double d = 0.0;
        for (int i = 0; i < n_; ++i) d = std::max(d, std::abs(column_norm(i) - 1.0));
        return d;
    }

private:
    int k_ = 0;
    int n_ = 0;
    std::vector<double> data_;
};

/// Columns drawn independently and uniformly on the unit sphere: k Gaussian
/// samples per column (column 0 first), normalized. Same seed, same matrix,
/// bit for bit.
inline FactorMatrix random_init(int n, int k, std::uint64_t seed) {
    FactorMatrix v(k, n);
    GaussianRng rng(seed);
    for (int i = 0; i < n; ++i) random_unit_vector(v.column(i), rng);
    return v;
}

} // namespace mixsdp
