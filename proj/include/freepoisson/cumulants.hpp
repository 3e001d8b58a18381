#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "combinat.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace freepoisson {

/// A trace restricted to words: maps a sequence of variable handles to the
/// value tau(a_1 a_2 ... a_k). Multilinearity is not assumed.
template <class Handle>
using MomentFunctional = std::function<Rational(std::span<const Handle>)>;

/// Evaluator of a per-block quantity (cumulant) on sub-words.
template <class Handle>
using BlockFunctional = std::function<Rational(std::span<const Handle>)>;

namespace detail {

inline void check_word_length(std::size_t k, std::size_t cap) {
    if (k == 0)
        throw UsageError("empty word");
    if (k > cap || k > kWordCap)
        throw ResourceLimitError("word length " + std::to_string(k) + " exceeds cap " +
                                 std::to_string(std::min(cap, kWordCap)));
}

} // namespace detail

/// sum over the given partitions of weight(theta) * prod_{B in theta} block(word|_B)
template <class Handle, class BlockFn, class WeightFn>
Rational partition_sum(const std::vector<SetPartition>& partitions, std::span<const Handle> word,
                       BlockFn&& block, WeightFn&& weight) {
    Rational sum = 0;
    for (const auto& theta : partitions) {
        Rational term = weight(theta);
        if (term.is_zero())
            continue;
        for (const auto& b : theta.blocks()) {
            auto sub = restrict_to(word, b);
            term *= block(std::span<const Handle>(sub));
            if (term.is_zero())
                break;
        }
        sum += term;
    }
    return sum;
}

/// Free cumulants of a moment functional, by the recursion
///   R(w) = tau(w) - sum_{theta in NC(k), theta != 1_k} prod_B R(w|_B),
/// memoized on sub-words. One instance per evaluation context; not
/// thread-safe.
template <class Handle>
class FreeCumulants {
public:
    explicit FreeCumulants(MomentFunctional<Handle> moment, std::size_t cap = kWordCap)
        : moment_(std::move(moment)), cap_(cap) {}

    Rational operator()(std::span<const Handle> word) {
        detail::check_word_length(word.size(), cap_);
        std::vector<Handle> key(word.begin(), word.end());
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        Rational r = moment(word);
        if (word.size() > 1) {
            r -= partition_sum(
                cached_nc_partitions(word.size()), word,
                [this](std::span<const Handle> sub) { return (*this)(sub); },
                [](const SetPartition& theta) { return Rational(theta.size() == 1 ? 0 : 1); });
        }
        memo_.emplace(std::move(key), r);
        return r;
    }

    /// The underlying moment, memoized as well.
    Rational moment(std::span<const Handle> word) {
        std::vector<Handle> key(word.begin(), word.end());
        if (auto it = moments_.find(key); it != moments_.end())
            return it->second;
        Rational m = moment_(word);
        moments_.emplace(std::move(key), m);
        return m;
    }

private:
    MomentFunctional<Handle> moment_;
    std::size_t cap_;
    std::map<std::vector<Handle>, Rational> memo_;
    std::map<std::vector<Handle>, Rational> moments_;
};

template <class Handle>
Rational free_cumulant(MomentFunctional<Handle> mf, std::span<const Handle> word, std::size_t cap = kWordCap) {
    return FreeCumulants<Handle>(std::move(mf), cap)(word);
}

/// sum_{theta in NC(k)} prod_B rc(word|_B)
template <class Handle>
Rational moments_from_free_cumulants(const BlockFunctional<Handle>& rc, std::span<const Handle> word,
                                     std::size_t cap = kWordCap) {
    detail::check_word_length(word.size(), cap);
    return partition_sum(cached_nc_partitions(word.size()), word, rc,
                         [](const SetPartition&) { return Rational(1); });
}

/// sum over all set partitions of prod_B cc(word|_B)
template <class Handle>
Rational classical_moment_from_cumulants(const BlockFunctional<Handle>& cc, std::span<const Handle> word,
                                         std::size_t cap = kWordCap) {
    detail::check_word_length(word.size(), cap);
    return partition_sum(cached_set_partitions(word.size()), word, cc,
                         [](const SetPartition&) { return Rational(1); });
}

/// Free cumulant of the centered variables a - tau(a): zero for single
/// letters, unchanged for longer words.
template <class Handle>
Rational centered_cumulant(MomentFunctional<Handle> mf, std::span<const Handle> word, std::size_t cap = kWordCap) {
    detail::check_word_length(word.size(), cap);
    if (word.size() == 1)
        return 0;
    return free_cumulant(std::move(mf), word, cap);
}

} // namespace freepoisson
