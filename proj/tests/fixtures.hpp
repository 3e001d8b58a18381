#pragma once

#include <random>
#include <vector>

#include "freepoisson/rational.hpp"
#include "freepoisson/space.hpp"

namespace fixtures {

using freepoisson::DiscreteSpace;
using freepoisson::Integer;
using freepoisson::JumpMeasure;
using freepoisson::Rational;
using freepoisson::TestFunction;

/// Cell "theta" of mass s and a "bulk" cell making the total volume V.
inline DiscreteSpace theta_and_bulk(const Rational& V, const Rational& s = 1) {
    return DiscreteSpace({"theta", "bulk"}, {s, V - s});
}

inline TestFunction chi_theta() { return TestFunction({Rational(1), Rational(0)}); }

inline std::vector<TestFunction> power_word(const TestFunction& f, std::size_t k) {
    return std::vector<TestFunction>(k, f);
}

inline Rational small_rational(std::mt19937& rng, int span = 4, int den = 3) {
    std::uniform_int_distribution<int> num(-span, span), d(1, den);
    return Rational(Integer(num(rng)), Integer(d(rng)));
}

inline Rational positive_rational(std::mt19937& rng, int span = 4, int den = 3) {
    std::uniform_int_distribution<int> num(1, span), d(1, den);
    return Rational(Integer(num(rng)), Integer(d(rng)));
}

inline DiscreteSpace random_space(std::mt19937& rng, std::size_t cells) {
    std::vector<std::string> ids;
    std::vector<Rational> masses;
    for (std::size_t c = 0; c < cells; ++c) {
        ids.push_back("c" + std::to_string(c));
        masses.push_back(positive_rational(rng));
    }
    return DiscreteSpace(ids, masses);
}

inline TestFunction random_function(std::mt19937& rng, std::size_t cells) {
    std::vector<Rational> v;
    for (std::size_t c = 0; c < cells; ++c)
        v.push_back(small_rational(rng));
    return TestFunction(v);
}

inline JumpMeasure random_jumps(std::mt19937& rng, std::size_t atoms) {
    std::vector<JumpMeasure::Atom> a;
    while (a.size() < atoms) {
        auto s = small_rational(rng, 3, 2);
        if (!s.is_zero())
            a.push_back({s, positive_rational(rng, 3, 2)});
    }
    return JumpMeasure(a);
}

} // namespace fixtures
