#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "combinat.hpp"
#include "cumulants.hpp"
#include "rational.hpp"
#include "space.hpp"

namespace freepoisson {

/// R^(k)(A(f_1),...,A(f_k)) = int s^k dnu * int f_1...f_k dsigma
inline Rational levy_free_cumulant(const DiscreteSpace& sp, const JumpMeasure& jm, std::span<const TestFunction> fs) {
    detail::check_word_length(fs.size(), kWordCap);
    return jump_moment(jm, static_cast<unsigned>(fs.size())) * integrate_product(sp, fs);
}

namespace detail {

template <class Keep>
Rational levy_resum(const std::vector<SetPartition>& partitions, const DiscreteSpace& sp, const JumpMeasure& jm,
                    std::span<const TestFunction> fs, Keep keep) {
    return partition_sum(
        partitions, fs, [&](std::span<const TestFunction> sub) { return levy_free_cumulant(sp, jm, sub); },
        [&](const SetPartition& theta) { return Rational(keep(theta) ? 1 : 0); });
}

} // namespace detail

/// Vacuum moment tau(A(f_1)...A(f_k)) of the free Levy white noise.
inline Rational levy_moment(const DiscreteSpace& sp, const JumpMeasure& jm, std::span<const TestFunction> fs) {
    detail::check_word_length(fs.size(), kWordCap);
    return detail::levy_resum(cached_nc_partitions(fs.size()), sp, jm, fs, [](const SetPartition&) { return true; });
}

/// Moment of the centered noise A(f) - tau(A(f)): only partitions without singletons.
inline Rational centered_levy_moment(const DiscreteSpace& sp, const JumpMeasure& jm, std::span<const TestFunction> fs) {
    detail::check_word_length(fs.size(), kWordCap);
    return detail::levy_resum(cached_nc_partitions(fs.size()), sp, jm, fs,
                              [](const SetPartition& theta) { return !theta.has_singleton(); });
}

/// Classical counterpart: same cumulants, summed over all set partitions.
inline Rational classical_levy_moment(const DiscreteSpace& sp, const JumpMeasure& jm,
                                      std::span<const TestFunction> fs) {
    detail::check_word_length(fs.size(), kWordCap);
    return detail::levy_resum(cached_set_partitions(fs.size()), sp, jm, fs, [](const SetPartition&) { return true; });
}

} // namespace freepoisson
