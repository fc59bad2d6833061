#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mixsdp/maxcut.hpp"
#include "mixsdp/maxsat.hpp"

// Exhaustive references for small instances. Test and verification code
// only; nothing on the solve path calls into this header.

namespace mixsdp::oracle {

inline constexpr int kMaxBruteForce = 20;

struct OracleResult {
    double optimum_value = 0.0;
    std::vector<int> witness; // +-1 signs for cuts, 0/1 values for formulas
    std::uint64_t enumerated = 0;
};

/// Exhaustive maximum cut with vertex 0 fixed to +1 (sign symmetry halves
/// the search). Refuses n > 20.
inline OracleResult brute_maxcut(const maxcut::Graph& g) {
    if (g.n > kMaxBruteForce) throw input_error("brute_maxcut: n exceeds brute-force cap of 20");
    if (g.n < 1) throw input_error("brute_maxcut: empty graph");
    OracleResult res;
    std::vector<int> signs(static_cast<std::size_t>(g.n), 1);
    res.witness = signs;
    res.optimum_value = maxcut::cut_value(g, signs);
    const std::uint64_t patterns = 1ULL << (g.n - 1);
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        for (int i = 1; i < g.n; ++i)
            signs[static_cast<std::size_t>(i)] = (mask >> (i - 1)) & 1ULL ? -1 : 1;
        const double value = maxcut::cut_value(g, signs);
        if (value > res.optimum_value) {
            res.optimum_value = value;
            res.witness = signs;
        }
    }
    res.enumerated = patterns;
    return res;
}

/// Exhaustive maximum satisfied weight. Refuses n_vars > 20.
inline OracleResult brute_maxsat(const maxsat::Formula& f) {
    if (f.n_vars > kMaxBruteForce)
        throw input_error("brute_maxsat: n_vars exceeds brute-force cap of 20");
    if (f.n_vars < 1) throw input_error("brute_maxsat: formula has no variables");
    OracleResult res;
    std::vector<bool> values(static_cast<std::size_t>(f.n_vars), false);
    res.witness.assign(static_cast<std::size_t>(f.n_vars), 0);
    res.optimum_value = maxsat::satisfied_weight(f, values);
    const std::uint64_t patterns = 1ULL << f.n_vars;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        for (int i = 0; i < f.n_vars; ++i) values[static_cast<std::size_t>(i)] = (mask >> i) & 1ULL;
        const double w = maxsat::satisfied_weight(f, values);
        if (w > res.optimum_value) {
            res.optimum_value = w;
            for (int i = 0; i < f.n_vars; ++i)
                res.witness[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(i)] ? 1 : 0;
        }
    }
    res.enumerated = patterns;
    return res;
}

/// Smallest eigenvalue of a dense symmetric matrix by the cyclic Jacobi
/// method, to about 1e-10. Refuses sizes above 64.
inline double dense_min_eig(std::vector<std::vector<double>> s) {
    const std::size_t n = s.size();
    if (n > 64) throw input_error("dense_min_eig: size exceeds cap of 64");
    if (n == 0) throw input_error("dense_min_eig: empty matrix");
    for (const auto& row : s)
        if (row.size() != n) throw input_error("dense_min_eig: matrix not square");

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(s[i][j]));
    if (scale == 0.0) return 0.0;

    auto off_diag = [&] {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += s[i][j] * s[i][j];
        return std::sqrt(sum);
    };

    for (int sweep = 0; sweep < 100 && off_diag() > 1e-12 * scale; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(s[p][q]) <= 1e-300) continue;
                const double tau = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double cos_r = 1.0 / std::sqrt(1.0 + t * t);
                const double sin_r = t * cos_r;
                for (std::size_t i = 0; i < n; ++i) {
                    const double sip = s[i][p], siq = s[i][q];
                    s[i][p] = cos_r * sip - sin_r * siq;
                    s[i][q] = sin_r * sip + cos_r * siq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double spi = s[p][i], sqi = s[q][i];
                    s[p][i] = cos_r * spi - sin_r * sqi;
                    s[q][i] = sin_r * spi + cos_r * sqi;
                }
            }
        }
    }

    double min_eig = s[0][0];
    for (std::size_t i = 1; i < n; ++i) min_eig = std::min(min_eig, s[i][i]);
    return min_eig;
}

/// Dense S = C + diag(y), the certificate matrix, for oracle checks.
inline std::vector<std::vector<double>> dense_certificate_matrix(const SparseCost& c,
                                                                 std::span<const double> y) {
    const int n = c.size();
    std::vector<std::vector<double>> s(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        s[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
        for (const auto& e : c.row(i))
            s[static_cast<std::size_t>(i)][static_cast<std::size_t>(e.col)] = e.value;
    }
    return s;
}

} // namespace mixsdp::oracle
