#include <gtest/gtest.h>

#include <random>

#include "freepoisson/space.hpp"

using namespace freepoisson;

namespace {

DiscreteSpace two_cells(Rational a, Rational b) { return DiscreteSpace({"a", "b"}, {a, b}); }

TestFunction fn(std::initializer_list<Rational> v) { return TestFunction(std::vector<Rational>(v)); }

} // namespace

TEST(DiscreteSpace, Validation) {
    EXPECT_THROW(DiscreteSpace({}, {}), UsageError);
    EXPECT_THROW(DiscreteSpace({"a"}, {Rational(-1)}), UsageError);
    EXPECT_THROW(DiscreteSpace({"a"}, {Rational(0)}), UsageError);
    EXPECT_THROW(DiscreteSpace({"a", "a"}, {Rational(1), Rational(1)}), UsageError);
    EXPECT_THROW(DiscreteSpace({"a", "b"}, {Rational(1)}), UsageError);
}

TEST(DiscreteSpace, TotalMass) {
    EXPECT_EQ(total_mass(DiscreteSpace::uniform(10)), 10);
    EXPECT_EQ(total_mass(DiscreteSpace::uniform(1)), 1);
    EXPECT_EQ(total_mass(two_cells(Rational(1, 2), Rational(3, 2))), 2);
}

TEST(Integrate, Examples) {
    auto sp = DiscreteSpace::uniform(10);
    std::vector<std::size_t> theta{3};
    auto chi = TestFunction::indicator(sp, theta);
    for (std::size_t k = 1; k <= 6; ++k) {
        std::vector<TestFunction> fs(k, chi);
        EXPECT_EQ(integrate_product(sp, fs), 1);
    }
    auto sp2 = two_cells(1, 1);
    std::vector<TestFunction> fg{fn({1, 0}), fn({1, 1})};
    EXPECT_EQ(integrate_product(sp2, fg), 1);
    std::vector<TestFunction> disjoint{fn({1, 0}), fn({0, 5})};
    EXPECT_EQ(integrate_product(sp2, disjoint), 0);
}

TEST(Integrate, Errors) {
    auto sp = two_cells(1, 1);
    std::vector<TestFunction> bad{fn({1, 2, 3})};
    EXPECT_THROW(integrate_product(sp, bad), UsageError);
    EXPECT_THROW(integrate_product(sp, std::span<const TestFunction>{}), UsageError);
}

TEST(Integrate, SymmetricAndMultilinear) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> val(-5, 5);
    auto rnd = [&](std::size_t n) {
        std::vector<Rational> v;
        for (std::size_t i = 0; i < n; ++i)
            v.emplace_back(Integer(val(rng)), Integer(1 + std::abs(val(rng))));
        return TestFunction(v);
    };
    DiscreteSpace sp({"a", "b", "c"}, {Rational(1, 2), Rational(2), Rational(3, 7)});
    for (int trial = 0; trial < 50; ++trial) {
        auto f = rnd(3), g = rnd(3), h = rnd(3);
        std::vector<TestFunction> fgh{f, g, h}, hfg{h, f, g};
        EXPECT_EQ(integrate_product(sp, fgh), integrate_product(sp, hfg));
        Rational a(Integer(val(rng)), 3);
        std::vector<Rational> comb;
        for (std::size_t c = 0; c < 3; ++c)
            comb.push_back(a * f[c] + g[c]);
        std::vector<TestFunction> lhs{TestFunction(comb), h}, left{f, h}, right{g, h};
        EXPECT_EQ(integrate_product(sp, lhs), a * integrate_product(sp, left) + integrate_product(sp, right));
    }
}

TEST(JumpMeasure, Moments) {
    auto unit = JumpMeasure::unit();
    for (unsigned n = 1; n <= 6; ++n)
        EXPECT_EQ(jump_moment(unit, n), 1);
    EXPECT_EQ(jump_moment(JumpMeasure({{2, 1}}), 3), 8);
    JumpMeasure sym({{1, 1}, {-1, 1}});
    for (unsigned n = 1; n <= 7; n += 2)
        EXPECT_EQ(jump_moment(sym, n), 0);
    EXPECT_EQ(jump_moment(sym, 2), 2);
    EXPECT_THROW(JumpMeasure({{0, 1}}), UsageError);
    EXPECT_THROW(JumpMeasure({{1, 0}}), UsageError);
    EXPECT_THROW(jump_moment(unit, 0), UsageError);
}

TEST(Normalize, Examples) {
    auto p = normalized_probability(DiscreteSpace::uniform(10));
    for (std::size_t c = 0; c < 10; ++c)
        EXPECT_EQ(p.mass(c), Rational(1, 10));
    auto again = normalized_probability(p);
    EXPECT_EQ(again.masses(), p.masses());
    auto q = normalized_probability(two_cells(1, 3));
    EXPECT_EQ(q.mass(0), Rational(1, 4));
    EXPECT_EQ(q.mass(1), Rational(3, 4));
    EXPECT_EQ(total_mass(q), 1);
}

TEST(ProductSpace, Examples) {
    auto sp = DiscreteSpace::uniform(10);
    std::vector<std::size_t> theta{0};
    auto chi = TestFunction::indicator(sp, theta);
    std::vector<TestFunction> two{chi, chi};
    EXPECT_EQ(product_space_moment(sp, JumpMeasure({{2, 1}}), two), Rational(2, 5));
    for (std::size_t k = 1; k <= 4; ++k) {
        std::vector<TestFunction> fs(k, chi);
        EXPECT_EQ(product_space_moment(sp, JumpMeasure::unit(), fs), integrate_product(sp, fs) / sp.total());
    }
    auto sp2 = two_cells(1, 1);
    std::vector<TestFunction> disjoint{fn({1, 0}), fn({0, 1})};
    EXPECT_EQ(product_space_moment(sp2, JumpMeasure({{3, 2}}), disjoint), 0);
}

TEST(ProductSpace, MatchesDoubleSumOverCellsAndAtoms) {
    DiscreteSpace sp({"x", "y", "z"}, {Rational(1, 3), Rational(2), Rational(5, 4)});
    JumpMeasure jm({{Rational(1, 2), Rational(3)}, {Rational(-2), Rational(1, 5)}});
    std::vector<TestFunction> fs{fn({1, Rational(-1, 2), 3}), fn({2, 1, 0}), fn({Rational(1, 3), 4, 1})};
    Rational V = sp.total() * jm.total();
    Rational brute = 0;
    for (std::size_t c = 0; c < sp.size(); ++c)
        for (const auto& a : jm.atoms()) {
            Rational term = sp.mass(c) * a.mass / V;
            for (const auto& f : fs)
                term *= f[c] * a.jump;
            brute += term;
        }
    EXPECT_EQ(product_space_moment(sp, jm, fs), brute);
}
