#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "freepoisson/systems.hpp"
#include "freepoisson/targets.hpp"

using namespace freepoisson;
using namespace fixtures;

namespace {

ParticleSystemSpec fixed(DiscreteSpace sp, std::int64_t n, std::optional<JumpMeasure> jm = std::nullopt) {
    return ParticleSystemSpec{std::move(sp), std::move(jm), FixedCount{n}};
}

ParticleSystemSpec poisson(DiscreteSpace sp, Rational alpha, std::optional<JumpMeasure> jm = std::nullopt) {
    return ParticleSystemSpec{std::move(sp), std::move(jm), PoissonCount{std::move(alpha)}};
}

} // namespace

TEST(SingleParticle, Moments) {
    auto sp = DiscreteSpace::uniform(10);
    auto one = TestFunction::constant(sp, 1);
    std::vector<std::size_t> theta{0};
    auto chi = TestFunction::indicator(sp, theta);
    auto spec = fixed(sp, 1);
    for (std::size_t k = 1; k <= 5; ++k) {
        EXPECT_EQ(single_particle_moment(spec, power_word(one, k)), 1);
        EXPECT_EQ(single_particle_moment(spec, power_word(chi, k)), Rational(1, 10));
    }
    auto marked = fixed(sp, 1, JumpMeasure({{2, 1}}));
    EXPECT_EQ(single_particle_moment(marked, power_word(chi, 2)), Rational(2, 5));
    std::vector<TestFunction> bad{TestFunction({Rational(1)})};
    EXPECT_THROW(single_particle_moment(spec, bad), UsageError);
}

TEST(SingleParticle, FreeCumulants) {
    auto sp = DiscreteSpace::uniform(10);
    auto spec = fixed(sp, 1);
    auto one = TestFunction::constant(sp, 1);
    EXPECT_EQ(single_particle_free_cumulant(spec, power_word(one, 1)), 1);
    for (std::size_t k = 2; k <= 6; ++k)
        EXPECT_EQ(single_particle_free_cumulant(spec, power_word(one, k)), 0);
    std::vector<std::size_t> theta{0};
    auto chi = TestFunction::indicator(sp, theta);
    EXPECT_EQ(single_particle_free_cumulant(spec, power_word(chi, 2)), Rational(9, 100));
}

TEST(SingleParticle, CumulantIsFirstOrderInInverseVolume) {
    // V R^(k) -> int f^k dsigma = 1 with error O(1/V).
    for (std::size_t k = 2; k <= 5; ++k) {
        Rational prev_err = -1;
        for (long V : {10, 100, 1000, 10000}) {
            auto spec = fixed(theta_and_bulk(V), 1);
            Rational err = abs(Rational(V) * single_particle_free_cumulant(spec, power_word(chi_theta(), k)) - 1);
            EXPECT_LE(err * V, Rational(static_cast<long>(4 * catalan(static_cast<unsigned>(k)).get_si())));
            if (prev_err.sign() >= 0) {
                EXPECT_LT(err, prev_err);
            }
            prev_err = err;
        }
    }
}

TEST(FixedN, Examples) {
    auto sp = DiscreteSpace::uniform(10);
    auto one = TestFunction::constant(sp, 1);
    for (std::int64_t N : {1, 2, 5})
        for (std::size_t k = 1; k <= 5; ++k)
            EXPECT_EQ(fixed_n_trace(fixed(sp, N), power_word(one, k)), pow(Rational(N), static_cast<unsigned>(k)));
    std::vector<std::size_t> theta{0};
    auto chi = TestFunction::indicator(sp, theta);
    EXPECT_EQ(fixed_n_trace(fixed(sp, 10), power_word(chi, 2)), Rational(19, 10));
    TestFunction f({Rational(3), Rational(-1), 0, 0, 0, 0, 0, 0, 0, Rational(1, 2)});
    EXPECT_EQ(fixed_n_trace(fixed(sp, 7), power_word(f, 1)), Rational(7) * (Rational(5, 2) / 10));
    EXPECT_THROW(fixed_n_trace(poisson(sp, 1), power_word(chi, 2)), UsageError);
}

TEST(FixedN, CumulantAdditivity) {
    // Free cumulants extracted from the N-particle trace are N times the single-particle ones.
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto sp = random_space(rng, 3);
        std::vector<TestFunction> family{random_function(rng, 3), random_function(rng, 3)};
        std::optional<JumpMeasure> jm;
        if (trial % 2)
            jm = random_jumps(rng, 2);
        std::int64_t N = 1 + trial % 4;
        auto spec = fixed(sp, N, jm);
        MomentFunctional<int> trace = [&](std::span<const int> w) {
            std::vector<TestFunction> fs;
            for (auto i : w)
                fs.push_back(family[static_cast<std::size_t>(i)]);
            return fixed_n_trace(spec, fs);
        };
        FreeCumulants<int> cumulants(trace);
        for (std::vector<int> w : {std::vector<int>{0}, {0, 1}, {1, 0, 1}, {0, 0, 1, 1}, {1, 0, 0, 1, 0}}) {
            std::vector<TestFunction> fs;
            for (auto i : w)
                fs.push_back(family[static_cast<std::size_t>(i)]);
            EXPECT_EQ(cumulants(w), Rational(N) * single_particle_free_cumulant(spec, fs));
        }
    }
}

TEST(FixedN, CumulantsAreMultilinear) {
    std::mt19937 rng(9);
    auto sp = random_space(rng, 3);
    auto spec = fixed(sp, 3);
    auto f = random_function(rng, 3), g = random_function(rng, 3), h = random_function(rng, 3);
    Rational a(5, 3);
    std::vector<Rational> comb;
    for (std::size_t c = 0; c < 3; ++c)
        comb.push_back(a * f[c] + g[c]);
    std::vector<TestFunction> lhs{h, TestFunction(comb), h}, w1{h, f, h}, w2{h, g, h};
    EXPECT_EQ(single_particle_free_cumulant(spec, lhs),
              a * single_particle_free_cumulant(spec, w1) + single_particle_free_cumulant(spec, w2));
}

TEST(FixedN, MarkedWithUnitAtomMatchesUnmarked) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        auto sp = random_space(rng, 3);
        std::vector<TestFunction> fs{random_function(rng, 3), random_function(rng, 3), random_function(rng, 3)};
        EXPECT_EQ(fixed_n_trace(fixed(sp, 4), fs), fixed_n_trace(fixed(sp, 4, JumpMeasure({{1, 1}})), fs));
        EXPECT_EQ(poissonized_trace(poisson(sp, Rational(7, 2)), fs),
                  poissonized_trace(poisson(sp, Rational(7, 2), JumpMeasure({{1, 1}})), fs));
    }
}

TEST(FixedN, ConvergesAtFirstOrder) {
    // e(V)/e(4V) in [3.5, 4.5] along N = V.
    auto limit_space = theta_and_bulk(10);
    for (std::size_t k = 2; k <= 5; ++k) {
        auto limit = levy_moment(limit_space, JumpMeasure::unit(), power_word(chi_theta(), k));
        EXPECT_EQ(limit, Rational(catalan(static_cast<unsigned>(k))));
        for (long V : {10, 40, 160}) {
            auto e1 = abs(fixed_n_trace(fixed(theta_and_bulk(V), V), power_word(chi_theta(), k)) - limit);
            auto e4 = abs(fixed_n_trace(fixed(theta_and_bulk(4 * V), 4 * V), power_word(chi_theta(), k)) - limit);
            double ratio = (e1 / e4).to_double();
            EXPECT_GE(ratio, 3.5) << "k=" << k << " V=" << V;
            EXPECT_LE(ratio, 4.5) << "k=" << k << " V=" << V;
        }
    }
}

TEST(Poissonized, Examples) {
    for (long V : {1, 10, 100}) {
        for (const auto& s : {Rational(1), Rational(1, 2)}) {
            auto sp = theta_and_bulk(V + 1, s); // keep the bulk non-empty
            Rational alpha = sp.total();
            TestFunction f({Rational(1), 0});
            EXPECT_EQ(poissonized_trace(poisson(sp, alpha), power_word(f, 1)), s);
            EXPECT_EQ(poissonized_trace(poisson(sp, alpha), power_word(f, 2)), s + s * s);
        }
    }
    auto sp = DiscreteSpace::uniform(3);
    auto one = TestFunction::constant(sp, 1);
    EXPECT_EQ(poissonized_trace(poisson(sp, 1), power_word(one, 3)), 5);
    for (std::size_t k = 1; k <= 6; ++k)
        EXPECT_EQ(poissonized_trace(poisson(sp, Rational(2, 7)), power_word(one, k)),
                  touchard(static_cast<unsigned>(k), Rational(2, 7)));
}

TEST(Poissonized, ExactAtOrderTwoForMixedWords) {
    std::mt19937 rng(21);
    for (long V : {1, 10, 100}) {
        DiscreteSpace sp({"a", "b", "bulk"}, {Rational(1, 3), Rational(1, 2), Rational(V)});
        TestFunction f({Rational(2), Rational(-1), 0}), g({Rational(1, 2), Rational(3), 0});
        for (auto fs : {std::vector<TestFunction>{f}, {f, g}, {g, g}}) {
            auto spec = poisson(sp, sp.total());
            EXPECT_EQ(poissonized_trace(spec, fs), levy_moment(sp, JumpMeasure::unit(), fs));
        }
        auto jm = JumpMeasure({{2, Rational(1, 2)}, {-1, 1}});
        auto marked = poisson(sp, sp.total() * jm.total(), jm);
        std::vector<TestFunction> fg{f, g};
        EXPECT_EQ(poissonized_trace(marked, fg), levy_moment(sp, jm, fg));
    }
}

TEST(Poissonized, TelescopingMatchesClosedForm) {
    // Per block count i: e^-a sum_N a^N N^i / N! = T_i(a), and the remainder after
    // telescoping to order m is carried by K(N,i,m): check sum_N w_N N K(N,i,m)
    // equals T_i(a) - sum_{j<=m} S(i,j) a^j in floating point.
    for (double alpha : {2.0, 5.0}) {
        for (unsigned i = 2; i <= 6; ++i)
            for (unsigned m = 1; m < i; ++m) {
                long double series = 0, w = std::exp(-alpha);
                for (int N = 0; N < 300; ++N) {
                    if (N >= 1)
                        series += w * N * k_coefficient(N, i, m).get_d();
                    w *= alpha / (N + 1);
                }
                double closed = touchard(i, Rational(static_cast<long>(alpha))).to_double();
                for (unsigned j = 1; j <= m; ++j)
                    closed -= stirling2(i, j).get_d() * std::pow(alpha, j);
                EXPECT_NEAR(static_cast<double>(series), closed, 1e-8 * std::max(1.0, std::abs(closed)))
                    << "i=" << i << " m=" << m;
            }
    }
}

TEST(PoissonizedSeries, AgreesWithClosedForm) {
    for (long V : {10, 40}) {
        auto sp = theta_and_bulk(V);
        auto spec = poisson(sp, V);
        for (std::size_t k = 1; k <= 5; ++k) {
            auto fs = power_word(chi_theta(), k);
            auto n_max = series_n_max(spec, fs, 1e-9);
            auto series = poissonized_trace_series(spec, fs, n_max, 1e-9);
            EXPECT_LE(series.tail_bound, 1e-9);
            EXPECT_NEAR(series.value, poissonized_trace(spec, fs).to_double(), 1e-9) << k;
        }
        auto two = poissonized_trace_series(spec, power_word(chi_theta(), 2),
                                            series_n_max(spec, power_word(chi_theta(), 2), 1e-9), 1e-9);
        EXPECT_NEAR(two.value, 2.0, 1e-9);
    }
}

TEST(PoissonizedSeries, ZeroParameterAndTruncation) {
    auto sp = theta_and_bulk(10);
    auto spec = poisson(sp, 0);
    auto r = poissonized_trace_series(spec, power_word(chi_theta(), 2), 5, 1e-9);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(poissonized_trace(spec, power_word(chi_theta(), 3)), 0);
    auto big = poisson(sp, 10);
    EXPECT_THROW(poissonized_trace_series(big, power_word(chi_theta(), 3), 5, 1e-9), TruncationError);
    EXPECT_THROW(poissonized_trace_series(big, power_word(chi_theta(), 3), 0, 1e-9), UsageError);
    EXPECT_THROW(poissonized_trace(poisson(sp, -1), power_word(chi_theta(), 1)), UsageError);
}

TEST(Centered, Examples) {
    auto sp = DiscreteSpace::uniform(10);
    std::vector<std::size_t> theta{0};
    auto chi = TestFunction::indicator(sp, theta);
    EXPECT_EQ(centered_fixed_n_trace(fixed(sp, 10), power_word(chi, 1)), 0);
    EXPECT_EQ(centered_poissonized_trace(poisson(sp, 10), power_word(chi, 1)), 0);
    EXPECT_EQ(centered_fixed_n_trace(fixed(sp, 10), power_word(chi, 2)), Rational(9, 10));
}

TEST(Centered, MatchesExplicitShift) {
    // tau_N((A-c)(A-c)...) expanded binomially with c = tau_N(A) for a single function.
    std::mt19937 rng(31);
    auto sp = random_space(rng, 3);
    auto f = random_function(rng, 3);
    auto spec = fixed(sp, 3, random_jumps(rng, 2));
    Rational c = fixed_n_trace(spec, power_word(f, 1));
    for (std::size_t k = 1; k <= 5; ++k) {
        Rational expanded = 0, binom = 1;
        for (std::size_t j = 0; j <= k; ++j) {
            Rational mj = j == 0 ? Rational(1) : fixed_n_trace(spec, power_word(f, j));
            expanded += binom * mj * pow(-c, static_cast<unsigned>(k - j));
            binom = binom * Rational(static_cast<long>(k - j)) / Rational(static_cast<long>(j + 1));
        }
        EXPECT_EQ(centered_fixed_n_trace(spec, power_word(f, k)), expanded) << k;
    }
}
