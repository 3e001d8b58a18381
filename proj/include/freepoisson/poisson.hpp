#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "errors.hpp"
#include "rational.hpp"

namespace freepoisson {

/// Truncated Poisson-weighted sum together with its certified tail bound.
struct SeriesResult {
    double value = 0;
    double tail_bound = 0;
    std::size_t n_max = 0;
};

/// log of e^{-alpha} alpha^N / N!
inline double poisson_log_weight(double alpha, std::size_t n) {
    if (alpha == 0)
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    auto N = static_cast<double>(n);
    return -alpha + N * std::log(alpha) - std::lgamma(N + 1);
}

/// Upper bound on sum_{N > n_max} e^{-alpha} alpha^N / N! * C * N^degree.
/// The term ratio t_{N+1}/t_N = alpha/(N+1) * (1+1/N)^degree decreases in N,
/// so the tail is dominated by a geometric series once that ratio is < 1.
/// Returns +inf when no bound can be certified at this n_max.
inline double poisson_tail_bound(double alpha, unsigned degree, double C, std::size_t n_max) {
    if (alpha == 0 || C == 0)
        return 0;
    auto M = static_cast<double>(n_max + 1);
    double ratio = alpha / (M + 1) * std::pow(1 + 1 / M, degree);
    if (ratio >= 1)
        return std::numeric_limits<double>::infinity();
    double first = std::exp(poisson_log_weight(alpha, n_max + 1) + degree * std::log(M));
    return C * first / (1 - ratio);
}

/// Smallest n_max whose tail bound is <= tol.
inline std::size_t poisson_required_n_max(double alpha, unsigned degree, double C, double tol,
                                          std::size_t limit = 1'000'000) {
    for (std::size_t n = 0; n <= limit; ++n)
        if (poisson_tail_bound(alpha, degree, C, n) <= tol)
            return n;
    throw TruncationError("no n_max below " + std::to_string(limit) + " certifies the Poisson tail");
}

inline void check_poisson_parameter(const Rational& alpha) {
    if (alpha.sign() < 0)
        throw UsageError("Poisson parameter must be non-negative");
}

} // namespace freepoisson
