#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace freepoisson {

/// Finite cell decomposition of a region with exact sigma-masses per cell.
/// Simple functions are constant on cells, so every integral the moment
/// formulas need reduces to a finite sum over cells.
class DiscreteSpace {
public:
    DiscreteSpace(std::vector<std::string> cells, std::vector<Rational> masses)
        : cells_(std::move(cells)), masses_(std::move(masses)) {
        if (cells_.empty())
            throw UsageError("space needs at least one cell");
        if (cells_.size() != masses_.size())
            throw UsageError("space: one mass per cell required");
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            if (masses_[i].sign() < 0)
                throw UsageError("space: negative mass on cell '" + cells_[i] + "'");
            for (std::size_t j = 0; j < i; ++j)
                if (cells_[j] == cells_[i])
                    throw UsageError("space: duplicate cell id '" + cells_[i] + "'");
            total_ += masses_[i];
        }
        if (total_.sign() <= 0)
            throw UsageError("space: total mass must be positive");
    }

    /// `count` cells named c0, c1, ... each with the given mass.
    static DiscreteSpace uniform(std::size_t count, const Rational& mass = 1) {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < count; ++i)
            ids.push_back("c" + std::to_string(i));
        return DiscreteSpace(std::move(ids), std::vector<Rational>(count, mass));
    }

    std::size_t size() const noexcept { return cells_.size(); }
    const std::string& cell(std::size_t i) const { return cells_.at(i); }
    const Rational& mass(std::size_t i) const { return masses_.at(i); }
    const std::vector<Rational>& masses() const noexcept { return masses_; }
    const Rational& total() const noexcept { return total_; }

    std::optional<std::size_t> index_of(const std::string& id) const {
        auto it = std::find(cells_.begin(), cells_.end(), id);
        if (it == cells_.end())
            return std::nullopt;
        return static_cast<std::size_t>(it - cells_.begin());
    }

    DiscreteSpace with_mass(std::size_t i, const Rational& m) const {
        auto masses = masses_;
        masses.at(i) = m;
        return DiscreteSpace(cells_, std::move(masses));
    }

private:
    std::vector<std::string> cells_;
    std::vector<Rational> masses_;
    Rational total_ = 0;
};

/// A simple function: one value per cell of a DiscreteSpace.
class TestFunction {
public:
    TestFunction() = default;
    explicit TestFunction(std::vector<Rational> values) : values_(std::move(values)) {}

    static TestFunction constant(const DiscreteSpace& sp, const Rational& c) {
        return TestFunction(std::vector<Rational>(sp.size(), c));
    }

    static TestFunction indicator(const DiscreteSpace& sp, std::span<const std::size_t> cells) {
        std::vector<Rational> v(sp.size(), 0);
        for (auto c : cells)
            v.at(c) = 1;
        return TestFunction(std::move(v));
    }

    std::size_t size() const noexcept { return values_.size(); }
    const Rational& operator[](std::size_t cell) const { return values_[cell]; }
    const std::vector<Rational>& values() const noexcept { return values_; }

    /// sup over cells of |f|
    Rational sup_norm() const {
        Rational m = 0;
        for (const auto& v : values_)
            m = std::max(m, abs(v));
        return m;
    }

    friend bool operator==(const TestFunction&, const TestFunction&) = default;

private:
    std::vector<Rational> values_;
};

/// Finite atomic Levy measure: jump sizes s != 0 with positive masses.
class JumpMeasure {
public:
    struct Atom {
        Rational jump;
        Rational mass;
    };

    explicit JumpMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty())
            throw UsageError("jump measure needs at least one atom");
        for (const auto& a : atoms_) {
            if (a.jump.is_zero())
                throw UsageError("jump measure atom at s = 0");
            if (a.mass.sign() <= 0)
                throw UsageError("jump measure atom with non-positive mass");
            total_ += a.mass;
        }
    }

    /// delta_1: the unmarked (free Poisson) case.
    static JumpMeasure unit() { return JumpMeasure({{1, 1}}); }

    std::size_t size() const noexcept { return atoms_.size(); }
    const Atom& atom(std::size_t i) const { return atoms_.at(i); }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const Rational& total() const noexcept { return total_; }

private:
    std::vector<Atom> atoms_;
    Rational total_ = 0;
};

inline Rational total_mass(const DiscreteSpace& sp) { return sp.total(); }

namespace detail {

inline void check_on(const DiscreteSpace& sp, const TestFunction& f) {
    if (f.size() != sp.size())
        throw UsageError("test function has " + std::to_string(f.size()) + " values, space has " +
                         std::to_string(sp.size()) + " cells");
}

} // namespace detail

/// Integral of f_1 ... f_k against sigma.
inline Rational integrate_product(const DiscreteSpace& sp, std::span<const TestFunction> fs) {
    if (fs.empty())
        throw UsageError("integrate_product needs at least one function");
    for (const auto& f : fs)
        detail::check_on(sp, f);
    Rational sum = 0;
    for (std::size_t c = 0; c < sp.size(); ++c) {
        if (sp.mass(c).is_zero())
            continue;
        Rational prod = sp.mass(c);
        for (const auto& f : fs) {
            prod *= f[c];
            if (prod.is_zero())
                break;
        }
        sum += prod;
    }
    return sum;
}

/// Sum over atoms of s^n * mass.
inline Rational jump_moment(const JumpMeasure& jm, unsigned n) {
    if (n == 0)
        throw UsageError("jump_moment needs n >= 1");
    Rational sum = 0;
    for (const auto& a : jm.atoms())
        sum += pow(a.jump, n) * a.mass;
    return sum;
}

/// sigma / sigma(Lambda).
inline DiscreteSpace normalized_probability(const DiscreteSpace& sp) {
    std::vector<std::string> ids;
    std::vector<Rational> masses;
    for (std::size_t c = 0; c < sp.size(); ++c) {
        ids.push_back(sp.cell(c));
        masses.push_back(sp.mass(c) / sp.total());
    }
    return DiscreteSpace(std::move(ids), std::move(masses));
}

/// Single-particle mixed moment of f_1(x)s ... f_k(x)s under (sigma x nu)/V,
/// V = sigma(Lambda) nu(Delta).
inline Rational product_space_moment(const DiscreteSpace& sp, const JumpMeasure& jm,
                                     std::span<const TestFunction> fs) {
    Rational volume = sp.total() * jm.total();
    return integrate_product(sp, fs) * jump_moment(jm, static_cast<unsigned>(fs.size())) / volume;
}

} // namespace freepoisson
