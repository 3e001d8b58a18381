#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace freepoisson {

/// Largest ground set the partition enumerators accept by default (Bell(10) = 115975).
inline constexpr std::size_t kPartitionCap = 10;

/// Longest word the moment/cumulant transforms accept (|NC(8)| = 1430).
inline constexpr std::size_t kWordCap = 8;

/// A partition of the positions {0, ..., n-1}. Blocks are kept sorted
/// ascending and ordered by least element, so equality is structural.
/// Rendering uses 1-based positions.
class SetPartition {
public:
    using Block = std::vector<std::size_t>;

    SetPartition() = default;

    /// Validates and canonicalizes. Throws UsageError unless the blocks are
    /// nonempty, pairwise disjoint and cover {0, ..., n-1}.
    SetPartition(std::size_t n, std::vector<Block> blocks) : n_(n), blocks_(std::move(blocks)) {
        std::vector<bool> seen(n, false);
        std::size_t covered = 0;
        for (auto& b : blocks_) {
            if (b.empty())
                throw UsageError("set partition has an empty block");
            std::sort(b.begin(), b.end());
            for (auto x : b) {
                if (x >= n || seen[x])
                    throw UsageError("set partition blocks overlap or leave the ground set");
                seen[x] = true;
                ++covered;
            }
        }
        if (covered != n)
            throw UsageError("set partition does not cover the ground set");
        std::sort(blocks_.begin(), blocks_.end(),
                  [](const Block& a, const Block& b) { return a.front() < b.front(); });
        noncrossing_ = scan_noncrossing();
    }

    /// Partition from a restricted growth string: rgs[i] is the block of position i.
    static SetPartition from_rgs(std::span<const std::size_t> rgs) {
        std::vector<Block> blocks;
        for (std::size_t i = 0; i < rgs.size(); ++i) {
            if (rgs[i] >= blocks.size())
                blocks.resize(rgs[i] + 1);
            blocks[rgs[i]].push_back(i);
        }
        return SetPartition(rgs.size(), std::move(blocks));
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return blocks_.size(); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    bool noncrossing() const noexcept { return noncrossing_; }

    bool has_singleton() const {
        return std::any_of(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.size() == 1; });
    }

    /// e.g. "{1,3}{2}"
    std::string str() const {
        std::string out;
        for (const auto& b : blocks_) {
            out += '{';
            for (std::size_t i = 0; i < b.size(); ++i) {
                if (i)
                    out += ',';
                out += std::to_string(b[i] + 1);
            }
            out += '}';
        }
        return out;
    }

    friend bool operator==(const SetPartition&, const SetPartition&) = default;

private:
    // Left-to-right sweep with a stack of open blocks: a block that is
    // revisited must be the innermost open one.
    bool scan_noncrossing() const {
        std::vector<std::size_t> owner(n_), remaining(blocks_.size());
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            remaining[j] = blocks_[j].size();
            for (auto x : blocks_[j])
                owner[x] = j;
        }
        std::vector<std::size_t> open;
        std::vector<bool> started(blocks_.size(), false);
        for (std::size_t x = 0; x < n_; ++x) {
            auto j = owner[x];
            if (started[j]) {
                if (open.empty() || open.back() != j)
                    return false;
            } else {
                started[j] = true;
                open.push_back(j);
            }
            if (--remaining[j] == 0)
                open.pop_back();
        }
        return true;
    }

    std::size_t n_ = 0;
    std::vector<Block> blocks_;
    bool noncrossing_ = true;
};

inline bool is_noncrossing(const SetPartition& p) { return p.noncrossing(); }

/// All partitions of {0..n-1} in restricted-growth-string order; count is Bell(n).
inline std::vector<SetPartition> enumerate_set_partitions(std::size_t n, std::size_t cap = kPartitionCap) {
    if (n == 0)
        throw UsageError("partitions need n >= 1");
    if (n > cap)
        throw ResourceLimitError("partition enumeration for n=" + std::to_string(n) +
                                 " exceeds cap " + std::to_string(cap));
    std::vector<SetPartition> out;
    std::vector<std::size_t> rgs(n, 0), max_prefix(n, 0);
    while (true) {
        out.push_back(SetPartition::from_rgs(rgs));
        // advance to the next restricted growth string
        std::size_t i = n - 1;
        while (i > 0 && rgs[i] > max_prefix[i - 1])
            --i;
        if (i == 0)
            break;
        ++rgs[i];
        for (std::size_t j = i; j < n; ++j) {
            if (j > i)
                rgs[j] = 0;
            max_prefix[j] = std::max(max_prefix[j - 1], rgs[j]);
        }
    }
    return out;
}

/// The non-crossing members of enumerate_set_partitions(n), same order; count is Catalan(n).
inline std::vector<SetPartition> enumerate_nc_partitions(std::size_t n, std::size_t cap = kPartitionCap) {
    auto all = enumerate_set_partitions(n, cap);
    std::vector<SetPartition> out;
    std::copy_if(all.begin(), all.end(), std::back_inserter(out),
                 [](const SetPartition& p) { return p.noncrossing(); });
    return out;
}

/// Shared read-only tables for n <= kWordCap, built once.
inline const std::vector<SetPartition>& cached_nc_partitions(std::size_t n) {
    static const auto table = [] {
        std::array<std::vector<SetPartition>, kWordCap + 1> t;
        for (std::size_t k = 1; k <= kWordCap; ++k)
            t[k] = enumerate_nc_partitions(k);
        return t;
    }();
    if (n == 0 || n > kWordCap)
        throw ResourceLimitError("word length " + std::to_string(n) + " outside 1.." + std::to_string(kWordCap));
    return table[n];
}

inline const std::vector<SetPartition>& cached_set_partitions(std::size_t n) {
    static const auto table = [] {
        std::array<std::vector<SetPartition>, kWordCap + 1> t;
        for (std::size_t k = 1; k <= kWordCap; ++k)
            t[k] = enumerate_set_partitions(k);
        return t;
    }();
    if (n == 0 || n > kWordCap)
        throw ResourceLimitError("word length " + std::to_string(n) + " outside 1.." + std::to_string(kWordCap));
    return table[n];
}

/// True iff every block of p lies inside a block of q (p is finer than q).
inline bool refines(const SetPartition& p, const SetPartition& q) {
    if (p.n() != q.n())
        throw UsageError("refines: partitions of different ground sets");
    std::vector<std::size_t> owner(q.n());
    for (std::size_t j = 0; j < q.blocks().size(); ++j)
        for (auto x : q.blocks()[j])
            owner[x] = j;
    for (const auto& b : p.blocks())
        for (auto x : b)
            if (owner[x] != owner[b.front()])
                return false;
    return true;
}

/// Stirling numbers of the second kind. S(0,0) = 1; S(i,j) = 0 when j > i or j = 0 < i.
inline Integer stirling2(unsigned i, unsigned j) {
    if (j > i)
        return 0;
    std::vector<Integer> row(j + 1, 0);
    row[0] = 1; // S(0,0)
    for (unsigned r = 1; r <= i; ++r) {
        for (unsigned c = std::min(r, j); c >= 1; --c)
            row[c] = Integer(c) * row[c] + row[c - 1];
        row[0] = 0;
    }
    return row[j];
}

/// (N)_j = N(N-1)...(N-j+1), with (N)_0 = 1.
inline Integer falling_factorial(const Integer& N, unsigned j) {
    Integer out = 1;
    for (unsigned t = 0; t < j; ++t)
        out *= N - t;
    return out;
}

/// K(N,i,m) = N^(i-1) - 1 - sum_{j=2..m} (N-1)_(j-1) S(i,j), for 1 <= m < i.
inline Integer k_coefficient(const Integer& N, unsigned i, unsigned m) {
    if (m < 1 || m >= i)
        throw UsageError("k_coefficient requires 1 <= m < i");
    Integer out;
    mpz_pow_ui(out.get_mpz_t(), N.get_mpz_t(), i - 1);
    out -= 1;
    for (unsigned j = 2; j <= m; ++j)
        out -= falling_factorial(N - 1, j - 1) * stirling2(i, j);
    return out;
}

/// T_i(alpha) = sum_j S(i,j) alpha^j, the i-th moment of Poisson(alpha).
inline Rational touchard(unsigned i, const Rational& alpha) {
    Rational out = 0;
    Rational power = 1;
    for (unsigned j = 0; j <= i; ++j) {
        out += Rational(stirling2(i, j)) * power;
        power *= alpha;
    }
    return out;
}

inline Integer bell(unsigned n) {
    // Bell triangle
    std::vector<Integer> row{1};
    for (unsigned r = 0; r < n; ++r) {
        std::vector<Integer> next{row.back()};
        for (const auto& v : row)
            next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

inline Integer catalan(unsigned n) {
    Integer c = 1;
    for (unsigned k = 0; k < n; ++k)
        c = c * 2 * (2 * k + 1) / (k + 2);
    return c;
}

/// Entries of `word` at the positions of `block`, relative order preserved.
template <class T>
std::vector<T> restrict_to(std::span<const T> word, const SetPartition::Block& block) {
    std::vector<T> out;
    out.reserve(block.size());
    for (auto x : block)
        out.push_back(word[x]);
    return out;
}

} // namespace freepoisson
