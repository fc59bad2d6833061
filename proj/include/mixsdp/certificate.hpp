#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "mixsdp/mixing.hpp"

namespace mixsdp {

struct EigEstimate {
    double value = 0.0;        // estimate of lambda_min(C + diag(y))
    double achieved_tol = 0.0; // final Rayleigh residual norm
    int iterations = 0;
};

/// Estimates lambda_min(S), S = C + diag(y), by power iteration on the
/// shifted matrix sigma*I - S, where sigma = max_i (y_i + ||c_i||_1) bounds
/// lambda_max(S) via Gershgorin. All eigenvalues of the shifted matrix are
/// nonnegative and the dominant one is sigma - lambda_min(S). Hitting
/// max_iters is not an error: the best estimate is returned with the
/// residual it actually achieved.
inline EigEstimate min_eigenvalue(const SparseCost& c, std::span<const double> y, double tol,
                                  int max_iters, std::uint64_t seed = 0) {
    const int n = c.size();
    if (static_cast<int>(y.size()) != n) throw input_error("min_eigenvalue: dimension mismatch");
    if (!(tol > 0.0)) throw input_error("min_eigenvalue: tol must be > 0");
    if (max_iters < 1) throw input_error("min_eigenvalue: max_iters must be positive");

    double sigma = 0.0;
    for (int i = 0; i < n; ++i)
        sigma = std::max(sigma, y[static_cast<std::size_t>(i)] + c.row_one_norm(i));
    if (sigma == 0.0) return {0.0, 0.0, 0}; // S is identically zero

    std::vector<double> x(static_cast<std::size_t>(n));
    GaussianRng rng(splitmix64(seed ^ 0x5ca1ab1eULL));
    random_unit_vector(x, rng);

    std::vector<double> w(static_cast<std::size_t>(n));
    auto apply_shifted = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            double s = (y[static_cast<std::size_t>(i)] - sigma) * in[static_cast<std::size_t>(i)];
            for (const auto& e : c.row(i)) s += e.value * in[static_cast<std::size_t>(e.col)];
            out[static_cast<std::size_t>(i)] = -s; // (sigma*I - S) x
        }
    };

    EigEstimate est;
    double mu = 0.0;
    double residual = sigma;
    for (int it = 1; it <= max_iters; ++it) {
        apply_shifted(x, w);
        mu = std::inner_product(x.begin(), x.end(), w.begin(), 0.0);
        double res_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = w[static_cast<std::size_t>(i)] - mu * x[static_cast<std::size_t>(i)];
            res_sq += r * r;
        }
        residual = std::sqrt(res_sq);
        est.iterations = it;
        if (residual <= tol) break;
        const double wn = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        if (wn == 0.0) { // exact null vector of the shifted matrix
            mu = 0.0;
            residual = 0.0;
            break;
        }
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / wn;
    }
    est.value = sigma - mu;
    est.achieved_tol = residual;
    return est;
}

/// Global-optimality gap certificate built from the dual characterization:
/// y' = y + max(0, -lambda_min(S)) * 1 is always dual feasible, so
/// f* >= -1'y - n*max(0, -lambda_min), and
/// f(V) - f* <= raw_gap + n*max(0, -lambda_min_estimate + lambda_tol).
struct Certificate {
    std::vector<double> y;
    double primal_value = 0.0;        // f(V)
    double dual_value = 0.0;          // -sum(y)
    double raw_gap = 0.0;             // f(V) + sum(y)
    double lambda_min_estimate = 0.0; // of S = C + diag(y)
    double lambda_tol = 0.0;          // estimation tolerance actually achieved
    double certified_gap_bound = 0.0;
    double residual = 0.0;            // first-order criticality residual of V
};

inline Certificate certify(const SparseCost& c, const FactorMatrix& v, double tol,
                           int max_iters = 50000, std::uint64_t seed = 0) {
    Certificate cert;
    cert.y = dual_vector(c, v);
    cert.primal_value = objective(c, v);
    const double y_sum = std::accumulate(cert.y.begin(), cert.y.end(), 0.0);
    cert.dual_value = -y_sum;
    cert.raw_gap = cert.primal_value + y_sum;

    const EigEstimate est = min_eigenvalue(c, cert.y, tol, max_iters, seed);
    cert.lambda_min_estimate = est.value;
    cert.lambda_tol = est.achieved_tol;
    cert.certified_gap_bound =
        cert.raw_gap + c.size() * std::max(0.0, -est.value + est.achieved_tol);
    cert.residual = fixed_point_residual(c, v);
    return cert;
}

} // namespace mixsdp
