#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "combinat.hpp"
#include "cumulants.hpp"
#include "errors.hpp"
#include "poisson.hpp"
#include "rational.hpp"
#include "space.hpp"

namespace freepoisson {

struct FixedCount {
    std::int64_t n = 1;
};

struct PoissonCount {
    Rational alpha;
};

using ParticleCount = std::variant<FixedCount, PoissonCount>;

/// Finite-volume system: particles distributed as (sigma x nu)/V on
/// Lambda x Delta, either N of them or a Poisson(alpha) number.
/// No jump measure means unmarked, i.e. nu = delta_1.
struct ParticleSystemSpec {
    DiscreteSpace space;
    std::optional<JumpMeasure> jumps;
    ParticleCount count = FixedCount{1};

    JumpMeasure jump_measure() const { return jumps ? *jumps : JumpMeasure::unit(); }

    /// V = sigma(Lambda) nu(Delta)
    Rational volume() const { return jumps ? space.total() * jumps->total() : space.total(); }
};

/// int f_1 ... f_k dP for the single-particle distribution of the system.
inline Rational single_particle_moment(const ParticleSystemSpec& spec, std::span<const TestFunction> fs) {
    if (spec.jumps)
        return product_space_moment(spec.space, *spec.jumps, fs);
    return integrate_product(spec.space, fs) / spec.space.total();
}

namespace detail {

/// Single-particle free cumulants over positions of a fixed function list.
class ParticleCumulants {
public:
    ParticleCumulants(const ParticleSystemSpec& spec, std::span<const TestFunction> fs)
        : cumulants_([&spec, fs](std::span<const std::size_t> idx) {
              std::vector<TestFunction> sub;
              sub.reserve(idx.size());
              for (auto i : idx)
                  sub.push_back(fs[i]);
              return single_particle_moment(spec, sub);
          }) {}

    Rational operator()(std::span<const std::size_t> idx) { return cumulants_(idx); }

private:
    FreeCumulants<std::size_t> cumulants_;
};

inline std::vector<std::size_t> iota_word(std::size_t k) {
    std::vector<std::size_t> w(k);
    for (std::size_t i = 0; i < k; ++i)
        w[i] = i;
    return w;
}

inline const std::int64_t& fixed_count(const ParticleSystemSpec& spec) {
    const auto* c = std::get_if<FixedCount>(&spec.count);
    if (!c)
        throw UsageError("system does not have a fixed particle number");
    if (c->n < 0)
        throw UsageError("particle number must be non-negative");
    return c->n;
}

inline const Rational& poisson_count(const ParticleSystemSpec& spec) {
    const auto* c = std::get_if<PoissonCount>(&spec.count);
    if (!c)
        throw UsageError("system does not have a Poisson particle number");
    check_poisson_parameter(c->alpha);
    return c->alpha;
}

} // namespace detail

inline Rational single_particle_free_cumulant(const ParticleSystemSpec& spec, std::span<const TestFunction> fs) {
    detail::check_word_length(fs.size(), kWordCap);
    auto word = detail::iota_word(fs.size());
    return detail::ParticleCumulants(spec, fs)(word);
}

/// Coefficients c_0..c_k of the N-particle trace as a polynomial in N:
///   tau_{Lambda,N}(A(f_1)...A(f_k)) = sum_i c_i N^i,
///   c_i = sum_{theta in NC(k), |theta| = i} prod_B R(f|_B).
/// Each block carries a factor N since cumulants of a sum of N free copies
/// add up. With `centered`, partitions containing a singleton are dropped
/// (first cumulants of A - tau(A) vanish).
inline std::vector<Rational> trace_polynomial(const ParticleSystemSpec& spec, std::span<const TestFunction> fs,
                                              bool centered = false) {
    detail::check_word_length(fs.size(), kWordCap);
    const auto k = fs.size();
    auto word = detail::iota_word(k);
    detail::ParticleCumulants cumulants(spec, fs);
    std::vector<Rational> coeffs(k + 1, 0);
    for (const auto& theta : cached_nc_partitions(k)) {
        if (centered && theta.has_singleton())
            continue;
        Rational term = 1;
        for (const auto& b : theta.blocks()) {
            auto sub = restrict_to(std::span<const std::size_t>(word), b);
            term *= cumulants(sub);
            if (term.is_zero())
                break;
        }
        coeffs[theta.size()] += term;
    }
    return coeffs;
}

inline Rational evaluate_polynomial(std::span<const Rational> coeffs, const Rational& x) {
    Rational out = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        out = out * x + *it;
    return out;
}

inline Rational fixed_n_trace(const ParticleSystemSpec& spec, std::span<const TestFunction> fs) {
    Rational n(detail::fixed_count(spec));
    return evaluate_polynomial(trace_polynomial(spec, fs), n);
}

inline Rational centered_fixed_n_trace(const ParticleSystemSpec& spec, std::span<const TestFunction> fs) {
    Rational n(detail::fixed_count(spec));
    return evaluate_polynomial(trace_polynomial(spec, fs, true), n);
}

/// Poisson average of the N-particle trace in closed form: E[N^i] = T_i(alpha).
inline Rational poissonized_trace(const ParticleSystemSpec& spec, std::span<const TestFunction> fs) {
    const auto& alpha = detail::poisson_count(spec);
    auto coeffs = trace_polynomial(spec, fs);
    Rational out = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        if (!coeffs[i].is_zero())
            out += coeffs[i] * touchard(static_cast<unsigned>(i), alpha);
    return out;
}

/// Centering is per particle-number sector, A(N) - tau_N(A(N)).
inline Rational centered_poissonized_trace(const ParticleSystemSpec& spec, std::span<const TestFunction> fs) {
    const auto& alpha = detail::poisson_count(spec);
    auto coeffs = trace_polynomial(spec, fs, true);
    Rational out = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        if (!coeffs[i].is_zero())
            out += coeffs[i] * touchard(static_cast<unsigned>(i), alpha);
    return out;
}

/// Floating-point Poisson series e^{-alpha} sum_{N<=n_max} alpha^N/N! tau_N
/// with the tail bounded through |tau_N| <= (sum_i |c_i|) N^k for N >= 1.
/// Throws TruncationError when the bound at n_max exceeds tail_tol.
inline SeriesResult poissonized_trace_series(const ParticleSystemSpec& spec, std::span<const TestFunction> fs,
                                             std::size_t n_max, double tail_tol, bool centered = false) {
    if (n_max < 1)
        throw UsageError("n_max must be >= 1");
    const auto& alpha_exact = detail::poisson_count(spec);
    double alpha = alpha_exact.to_double();
    auto coeffs = trace_polynomial(spec, fs, centered);
    const auto k = static_cast<unsigned>(fs.size());

    double C = 0;
    for (const auto& c : coeffs)
        C += std::abs(c.to_double());
    SeriesResult out;
    out.n_max = n_max;
    out.tail_bound = poisson_tail_bound(alpha, k, C, n_max);
    if (!(out.tail_bound <= tail_tol))
        throw TruncationError("Poisson tail bound " + std::to_string(out.tail_bound) + " exceeds tolerance at n_max=" +
                              std::to_string(n_max));

    long double sum = 0;
    for (std::size_t N = 0; N <= n_max; ++N) {
        double lw = poisson_log_weight(alpha, N);
        if (!std::isfinite(lw) || lw < -745)
            continue;
        // N = 0 is the empty system: A(Lambda,0;f) = 0, so the trace of a nonempty word vanishes.
        if (N == 0)
            continue;
        sum += std::exp(static_cast<long double>(lw)) *
               static_cast<long double>(evaluate_polynomial(coeffs, Rational(N)).to_double());
    }
    out.value = static_cast<double>(sum);
    return out;
}

/// n_max for poissonized_trace_series at the requested tolerance.
inline std::size_t series_n_max(const ParticleSystemSpec& spec, std::span<const TestFunction> fs, double tail_tol,
                                bool centered = false) {
    const auto& alpha = detail::poisson_count(spec);
    auto coeffs = trace_polynomial(spec, fs, centered);
    double C = 0;
    for (const auto& c : coeffs)
        C += std::abs(c.to_double());
    return std::max<std::size_t>(1, poisson_required_n_max(alpha.to_double(), static_cast<unsigned>(fs.size()), C,
                                                           tail_tol));
}

} // namespace freepoisson
