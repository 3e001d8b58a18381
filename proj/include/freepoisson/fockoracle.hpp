#pragma once

// Operator-level oracles. Both build the relevant Hilbert space explicitly
// over a finite set of base points and evaluate vacuum expectations by
// applying operators to vectors, independently of the cumulant machinery.
//
//  (A) full Fock space over L^2(Lambda x Delta, sigma x nu), operators
//      A(f) = a+(h) + a0(h) + a-(h) + int f dsigma int s dnu,  h = f (x) id.
//  (B) free product of N copies of L^2(Lambda x Delta, P), P = (sigma x nu)/V,
//      operators M_i(f) and A(Lambda,N;f) = sum_i M_i(f).
//
// Vectors are expanded in the basis of point indicators e_p. The basis is
// orthogonal but not normalized: (e_p, e_q) = delta_pq m(p) with m the point
// mass (A) or probability (B), so all coefficients stay rational.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "poisson.hpp"
#include "rational.hpp"
#include "space.hpp"

namespace freepoisson {

/// Base points (cell, atom) of Lambda x Delta with their sigma x nu masses.
class MarkedPoints {
public:
    MarkedPoints(const DiscreteSpace& sp, const JumpMeasure& jm) : cells_(sp.size()) {
        for (std::size_t c = 0; c < sp.size(); ++c)
            for (const auto& a : jm.atoms()) {
                cell_.push_back(c);
                jump_.push_back(a.jump);
                mass_.push_back(sp.mass(c) * a.mass);
            }
        total_ = sp.total() * jm.total();
        for (const auto& m : mass_)
            probability_.push_back(m / total_);
    }

    std::size_t size() const noexcept { return mass_.size(); }
    const Rational& mass(std::size_t p) const { return mass_[p]; }
    const Rational& probability(std::size_t p) const { return probability_[p]; }
    const Rational& total() const noexcept { return total_; }

    /// Values of f (x) id at every point: f(x) s.
    std::vector<Rational> lift(const TestFunction& f) const {
        if (f.size() != cells_)
            throw UsageError("test function does not match the oracle's space");
        std::vector<Rational> h(size());
        for (std::size_t p = 0; p < size(); ++p)
            h[p] = f[cell_[p]] * jump_[p];
        return h;
    }

private:
    std::size_t cells_;
    std::vector<std::size_t> cell_;
    std::vector<Rational> jump_, mass_, probability_;
    Rational total_;
};

namespace detail {

using Word = std::vector<std::uint32_t>;

inline void accumulate(std::map<Word, Rational>& terms, Word key, const Rational& value) {
    if (value.is_zero())
        return;
    auto [it, inserted] = terms.try_emplace(std::move(key), value);
    if (!inserted) {
        it->second += value;
        if (it->second.is_zero())
            terms.erase(it);
    }
}

inline void check_depth_argument(std::size_t k, std::size_t d) {
    if (d < k)
        throw TruncationError("truncation depth " + std::to_string(d) + " is below word length " +
                              std::to_string(k) + "; the result would be silently truncated");
}

inline Rational sum_mean(std::span<const Rational> h, const MarkedPoints& pts) {
    Rational m = 0;
    for (std::size_t p = 0; p < pts.size(); ++p)
        m += h[p] * pts.probability(p);
    return m;
}

} // namespace detail

/// Finitely supported vector in the truncated full Fock space. Keys are
/// words of point indices; the empty word is the vacuum.
class TensorVector {
public:
    using Word = detail::Word;

    explicit TensorVector(std::size_t max_depth) : max_depth_(max_depth) {}

    static TensorVector vacuum(std::size_t max_depth) {
        TensorVector v(max_depth);
        v.add({}, 1);
        return v;
    }

    void add(Word w, const Rational& c) {
        if (w.size() > max_depth_)
            throw TruncationError("Fock vector component beyond truncation depth " + std::to_string(max_depth_));
        detail::accumulate(terms_, std::move(w), c);
    }

    Rational coefficient(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational vacuum_coefficient() const { return coefficient({}); }

    std::size_t depth() const {
        std::size_t d = 0;
        for (const auto& [w, c] : terms_)
            d = std::max(d, w.size());
        return d;
    }

    std::size_t max_depth() const noexcept { return max_depth_; }
    const std::map<Word, Rational>& terms() const noexcept { return terms_; }

    /// Drop components longer than `depth`.
    void prune(std::size_t depth) { std::erase_if(terms_, [depth](const auto& kv) { return kv.first.size() > depth; }); }

private:
    std::size_t max_depth_;
    std::map<Word, Rational> terms_;
};

/// (v, w) with (e_p1...e_pn, e_q1...e_qn) = prod delta m(p_j).
inline Rational fock_inner(const MarkedPoints& pts, const TensorVector& v, const TensorVector& w) {
    Rational sum = 0;
    for (const auto& [word, c] : v.terms()) {
        auto other = w.coefficient(word);
        if (other.is_zero())
            continue;
        Rational term = c * other;
        for (auto p : word)
            term *= pts.mass(p);
        sum += term;
    }
    return sum;
}

/// A(f) v = (a+(h) + a0(h) + a-(h) + int f dsigma int s dnu) v.
inline TensorVector fock_apply(const MarkedPoints& pts, const TestFunction& f, const TensorVector& v) {
    if (v.depth() >= v.max_depth() && !v.terms().empty())
        throw TruncationError("creation would exceed Fock truncation depth " + std::to_string(v.max_depth()));
    auto h = pts.lift(f);
    Rational scalar = 0;
    for (std::size_t p = 0; p < pts.size(); ++p)
        scalar += h[p] * pts.mass(p);

    TensorVector out(v.max_depth());
    for (const auto& [word, c] : v.terms()) {
        // creation
        for (std::size_t p = 0; p < pts.size(); ++p) {
            if (h[p].is_zero())
                continue;
            TensorVector::Word longer;
            longer.reserve(word.size() + 1);
            longer.push_back(static_cast<std::uint32_t>(p));
            longer.insert(longer.end(), word.begin(), word.end());
            out.add(std::move(longer), h[p] * c);
        }
        out.add(word, scalar * c);
        if (word.empty())
            continue; // a0 and a- kill the vacuum
        const auto& lead = h[word.front()];
        // preservation: multiply the first letter by h
        out.add(word, lead * c);
        // annihilation: contract the first letter against h
        out.add(TensorVector::Word(word.begin() + 1, word.end()), lead * pts.mass(word.front()) * c);
    }
    return out;
}

inline TensorVector fock_apply(const DiscreteSpace& sp, const JumpMeasure& jm, const TestFunction& f,
                               const TensorVector& v) {
    return fock_apply(MarkedPoints(sp, jm), f, v);
}

/// (A(f_1) ... A(f_k) Omega, Omega), exact for d >= k.
inline Rational fock_vacuum_expectation(const DiscreteSpace& sp, const JumpMeasure& jm,
                                        std::span<const TestFunction> fs, std::size_t d) {
    detail::check_depth_argument(fs.size(), d);
    MarkedPoints pts(sp, jm);
    auto v = TensorVector::vacuum(d);
    const auto k = fs.size();
    for (std::size_t t = 0; t < k; ++t) {
        v = fock_apply(pts, fs[k - 1 - t], v);
        // each remaining factor lowers the depth by at most one
        v.prune(k - 1 - t);
    }
    return v.vacuum_coefficient();
}

/// Vector in the truncated free product of N copies. A key interleaves
/// (label, point) pairs: [l1, p1, l2, p2, ...] with adjacent labels distinct;
/// the empty key is Psi_N.
class FreeProductVector {
public:
    using Key = detail::Word;

    /// Hard cap on stored coefficients.
    static constexpr std::size_t kMaxTerms = 4'000'000;

    FreeProductVector(std::size_t particles, std::size_t max_depth) : particles_(particles), max_depth_(max_depth) {}

    static FreeProductVector vacuum(std::size_t particles, std::size_t max_depth) {
        FreeProductVector v(particles, max_depth);
        v.add({}, 1);
        return v;
    }

    void add(Key key, const Rational& c) {
        if (key.size() / 2 > max_depth_)
            throw TruncationError("free product vector component beyond truncation depth " +
                                  std::to_string(max_depth_));
        detail::accumulate(terms_, std::move(key), c);
        if (terms_.size() > kMaxTerms)
            throw ResourceLimitError("free product vector exceeds " + std::to_string(kMaxTerms) + " terms");
    }

    Rational coefficient(const Key& key) const {
        auto it = terms_.find(key);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational vacuum_coefficient() const { return coefficient({}); }

    std::size_t depth() const {
        std::size_t d = 0;
        for (const auto& [key, c] : terms_)
            d = std::max(d, key.size() / 2);
        return d;
    }

    std::size_t particles() const noexcept { return particles_; }
    std::size_t max_depth() const noexcept { return max_depth_; }
    const std::map<Key, Rational>& terms() const noexcept { return terms_; }

    void prune(std::size_t depth) {
        std::erase_if(terms_, [depth](const auto& kv) { return kv.first.size() / 2 > depth; });
    }

private:
    std::size_t particles_;
    std::size_t max_depth_;
    std::map<Key, Rational> terms_;
};

/// Scalar product of the free product space: each slot uses L^2(P).
inline Rational free_product_inner(const MarkedPoints& pts, const FreeProductVector& v, const FreeProductVector& w) {
    Rational sum = 0;
    for (const auto& [key, c] : v.terms()) {
        auto other = w.coefficient(key);
        if (other.is_zero())
            continue;
        Rational term = c * other;
        for (std::size_t j = 1; j < key.size(); j += 2)
            term *= pts.probability(key[j]);
        sum += term;
    }
    return sum;
}

namespace detail {

inline FreeProductVector::Key prepend(std::uint32_t label, std::uint32_t point, const FreeProductVector::Key& rest,
                                      std::size_t skip = 0) {
    FreeProductVector::Key key;
    key.reserve(rest.size() + 2 - skip);
    key.push_back(label);
    key.push_back(point);
    key.insert(key.end(), rest.begin() + static_cast<std::ptrdiff_t>(skip), rest.end());
    return key;
}

/// Adds M_i(f) applied to the single basis tensor `key` with coefficient c.
inline void apply_particle(const MarkedPoints& pts, std::span<const Rational> h, const Rational& mean,
                           std::uint32_t i, const FreeProductVector::Key& key, const Rational& c,
                           FreeProductVector& out) {
    if (key.empty() || key.front() != i) {
        // <f> g + [f]_i (x) g
        out.add(key, mean * c);
        for (std::size_t p = 0; p < pts.size(); ++p)
            out.add(prepend(i, static_cast<std::uint32_t>(p), key), (h[p] - mean) * c);
        return;
    }
    // leading slot is e_q in H_i: <f e_q> rest + [f e_q]_i (x) rest
    auto q = key[1];
    Rational fq = h[q] * c;
    if (fq.is_zero())
        return;
    Rational fq_mean = fq * pts.probability(q);
    out.add(FreeProductVector::Key(key.begin() + 2, key.end()), fq_mean);
    out.add(key, fq);
    for (std::size_t p = 0; p < pts.size(); ++p)
        out.add(prepend(i, static_cast<std::uint32_t>(p), key, 2), -fq_mean);
}

inline void check_headroom(const FreeProductVector& v) {
    if (!v.terms().empty() && v.depth() >= v.max_depth())
        throw TruncationError("free product truncation depth " + std::to_string(v.max_depth()) + " exhausted");
}

} // namespace detail

/// M_i(f) v for particle index i in [0, N).
inline FreeProductVector free_product_apply(const MarkedPoints& pts, std::size_t i, const TestFunction& f,
                                            const FreeProductVector& v) {
    if (i >= v.particles())
        throw UsageError("particle index out of range");
    detail::check_headroom(v);
    auto h = pts.lift(f);
    auto mean = detail::sum_mean(h, pts);
    FreeProductVector out(v.particles(), v.max_depth());
    for (const auto& [key, c] : v.terms())
        detail::apply_particle(pts, h, mean, static_cast<std::uint32_t>(i), key, c, out);
    return out;
}

/// A(Lambda,N;f) v = sum_i M_i(f) v.
inline FreeProductVector free_product_sum_apply(const MarkedPoints& pts, const TestFunction& f,
                                                const FreeProductVector& v) {
    detail::check_headroom(v);
    auto h = pts.lift(f);
    auto mean = detail::sum_mean(h, pts);
    FreeProductVector out(v.particles(), v.max_depth());
    for (const auto& [key, c] : v.terms())
        for (std::size_t i = 0; i < v.particles(); ++i)
            detail::apply_particle(pts, h, mean, static_cast<std::uint32_t>(i), key, c, out);
    return out;
}

/// One factor M_particle(fs[function]) of a word.
struct ParticleLetter {
    std::size_t particle = 0;
    std::size_t function = 0;

    friend auto operator<=>(const ParticleLetter&, const ParticleLetter&) = default;
};

/// (M_{i_1}(f_{j_1}) ... M_{i_k}(f_{j_k}) Psi_N, Psi_N)
inline Rational free_product_word_expectation(const MarkedPoints& pts, std::size_t particles,
                                              std::span<const TestFunction> fs,
                                              std::span<const ParticleLetter> letters, std::size_t d) {
    detail::check_depth_argument(letters.size(), d);
    auto v = FreeProductVector::vacuum(particles, d);
    const auto k = letters.size();
    for (std::size_t t = 0; t < k; ++t) {
        const auto& letter = letters[k - 1 - t];
        v = free_product_apply(pts, letter.particle, fs[letter.function], v);
        v.prune(k - 1 - t);
    }
    return v.vacuum_coefficient();
}

/// tau_{Lambda,N}(A(Lambda,N;f_1) ... A(Lambda,N;f_k)) via explicit operators.
/// N = 0 is the empty system, where every A vanishes.
inline Rational free_product_vacuum_expectation(const DiscreteSpace& sp, const std::optional<JumpMeasure>& jumps,
                                                std::size_t particles, std::span<const TestFunction> fs,
                                                std::size_t d) {
    detail::check_depth_argument(fs.size(), d);
    if (fs.empty())
        return 1;
    if (particles == 0)
        return 0;
    MarkedPoints pts(sp, jumps ? *jumps : JumpMeasure::unit());
    auto v = FreeProductVector::vacuum(particles, d);
    const auto k = fs.size();
    for (std::size_t t = 0; t < k; ++t) {
        v = free_product_sum_apply(pts, fs[k - 1 - t], v);
        v.prune(k - 1 - t);
    }
    return v.vacuum_coefficient();
}

inline Rational free_product_vacuum_expectation(const DiscreteSpace& sp, std::size_t particles,
                                                std::span<const TestFunction> fs, std::size_t d) {
    return free_product_vacuum_expectation(sp, std::nullopt, particles, fs, d);
}

/// Poisson(alpha)-weighted sum of oracle (B) traces over N <= n_max. The
/// tail uses |tau_N| <= N^k prod_j sup|f_j (x) id|, since each M_i(f) has
/// norm at most sup|f (x) id|.
inline SeriesResult poissonized_oracle(const DiscreteSpace& sp, const std::optional<JumpMeasure>& jumps,
                                       const Rational& alpha, std::span<const TestFunction> fs, std::size_t n_max,
                                       double tail_tol, std::size_t d) {
    check_poisson_parameter(alpha);
    detail::check_depth_argument(fs.size(), d);
    auto jm = jumps ? *jumps : JumpMeasure::unit();
    Rational max_jump = 0;
    for (const auto& a : jm.atoms())
        max_jump = std::max(max_jump, abs(a.jump));
    double C = 1;
    for (const auto& f : fs)
        C *= (f.sup_norm() * max_jump).to_double();

    SeriesResult out;
    out.n_max = n_max;
    out.tail_bound = poisson_tail_bound(alpha.to_double(), static_cast<unsigned>(fs.size()), C, n_max);
    if (!(out.tail_bound <= tail_tol))
        throw TruncationError("oracle Poisson tail bound " + std::to_string(out.tail_bound) +
                              " exceeds tolerance at n_max=" + std::to_string(n_max));
    long double sum = 0;
    for (std::size_t N = 1; N <= n_max; ++N) {
        double lw = poisson_log_weight(alpha.to_double(), N);
        if (!std::isfinite(lw) || lw < -745)
            continue;
        sum += std::exp(static_cast<long double>(lw)) *
               static_cast<long double>(free_product_vacuum_expectation(sp, jumps, N, fs, d).to_double());
    }
    out.value = static_cast<double>(sum);
    return out;
}

/// n_max certifying the oracle's tail at `tail_tol`.
inline std::size_t poissonized_oracle_n_max(const DiscreteSpace& sp, const std::optional<JumpMeasure>& jumps,
                                            const Rational& alpha, std::span<const TestFunction> fs,
                                            double tail_tol) {
    auto jm = jumps ? *jumps : JumpMeasure::unit();
    Rational max_jump = 0;
    for (const auto& a : jm.atoms())
        max_jump = std::max(max_jump, abs(a.jump));
    double C = 1;
    for (const auto& f : fs) {
        detail::check_on(sp, f);
        C *= (f.sup_norm() * max_jump).to_double();
    }
    return std::max<std::size_t>(
        1, poisson_required_n_max(alpha.to_double(), static_cast<unsigned>(fs.size()), C, tail_tol));
}

} // namespace freepoisson
