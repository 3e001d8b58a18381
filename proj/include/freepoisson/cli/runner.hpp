#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "../combinat.hpp"
#include "../cumulants.hpp"
#include "../errors.hpp"
#include "../fockoracle.hpp"
#include "../rational.hpp"
#include "../space.hpp"
#include "../systems.hpp"
#include "../targets.hpp"
#include "config.hpp"

namespace freepoisson::cli {

using Cell = std::optional<std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

inline const std::vector<std::string> kExperimentHeader{"word",        "V",           "N_or_alpha",
                                                        "value_exact", "value_decimal", "limit_exact",
                                                        "error_decimal", "order_estimate"};

inline const std::vector<std::string> kOracleHeader{"check",        "word",        "N_or_alpha",
                                                    "combinatorial", "oracle", "discrepancy"};

inline const std::vector<std::string> kPartitionHeader{"kind", "n", "index", "partition", "num_blocks", "count"};

/// Evaluates tasks on up to `threads` workers; results keep task order. The
/// first failing task (by index) has its exception rethrown.
template <class T>
std::vector<T> parallel_map(const std::vector<std::function<T()>>& tasks, std::size_t threads) {
    std::vector<std::optional<T>> out(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                out[i] = tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, tasks.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<T> result;
    result.reserve(out.size());
    for (auto& o : out)
        result.push_back(std::move(*o));
    return result;
}

/// Nearest integer, ties to even.
inline Integer round_half_even(const Rational& x) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), x.numerator().get_mpz_t(), x.denominator().get_mpz_t());
    Rational frac = x - Rational(q);
    Rational half(1, 2);
    if (frac > half || (frac == half && mpz_odd_p(q.get_mpz_t())))
        q += 1;
    return q;
}

inline std::string format_order(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", p);
    return buf;
}

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Space at scale factor c: the bulk cell absorbs the extra mass so that
/// sigma(Lambda) = c * sigma_0(Lambda), test-function supports untouched.
inline DiscreteSpace scaled_space(const ExperimentConfig& cfg, const Rational& c) {
    const auto& sp = *cfg.space;
    auto bulk = *cfg.bulk;
    Rational m = sp.mass(bulk) + (c - 1) * sp.total();
    if (m.sign() < 0)
        throw ConfigError(0, "scale factor " + c.str() + " would give the bulk cell negative mass");
    return sp.with_mass(bulk, m);
}

namespace detail {

inline DiscreteSpace scale_masses(const DiscreteSpace& sp, const Rational& r) {
    std::vector<std::string> ids;
    std::vector<Rational> masses;
    for (std::size_t c = 0; c < sp.size(); ++c) {
        ids.push_back(sp.cell(c));
        masses.push_back(sp.mass(c) * r);
    }
    return DiscreteSpace(std::move(ids), std::move(masses));
}

struct Evaluation {
    Rational volume;
    std::string count;
    Rational value;
    Rational limit;
};

inline Evaluation evaluate_word(const ExperimentConfig& cfg, const DiscreteSpace& sp,
                                const std::vector<std::size_t>& word) {
    ParticleSystemSpec spec{sp, cfg.jumps, FixedCount{0}};
    auto fs = cfg.word_functions(word);
    Evaluation ev;
    ev.volume = spec.volume();
    if (cfg.count.mode == CountMode::Fixed) {
        Integer n = cfg.count.n ? Integer(static_cast<long>(*cfg.count.n)) : round_half_even(*cfg.count.rho * ev.volume);
        if (!n.fits_slong_p())
            throw ResourceLimitError("particle number " + n.get_str() + " is too large");
        spec.count = FixedCount{n.get_si()};
        ev.count = n.get_str();
        ev.value = cfg.centered ? centered_fixed_n_trace(spec, fs) : fixed_n_trace(spec, fs);
    } else {
        Rational alpha = cfg.count.alpha ? *cfg.count.alpha : *cfg.count.rho * ev.volume;
        spec.count = PoissonCount{alpha};
        ev.count = alpha.str();
        ev.value = cfg.centered ? centered_poissonized_trace(spec, fs) : poissonized_trace(spec, fs);
    }
    // N/V -> rho scales every limit cumulant by rho, i.e. the intensity sigma becomes rho sigma
    auto jm = spec.jump_measure();
    auto intensity = cfg.count.rho ? scale_masses(sp, *cfg.count.rho) : sp;
    ev.limit = cfg.centered ? centered_levy_moment(intensity, jm, fs) : levy_moment(intensity, jm, fs);
    return ev;
}

inline std::vector<Cell> experiment_row(const ExperimentConfig& cfg, const std::vector<std::size_t>& word,
                                        const Evaluation& ev, Cell order) {
    return {cfg.word_label(word),
            ev.volume.str(),
            ev.count,
            ev.value.str(),
            ev.value.decimal(),
            ev.limit.str(),
            abs(ev.value - ev.limit).decimal(),
            std::move(order)};
}

} // namespace detail

/// One row per word: finite-system value, limit value and their difference.
inline Table run_moments(const ExperimentConfig& cfg, std::size_t threads = 1) {
    std::vector<std::function<detail::Evaluation()>> tasks;
    for (const auto& w : cfg.words)
        tasks.push_back([&cfg, &w] { return detail::evaluate_word(cfg, *cfg.space, w); });
    auto results = parallel_map(tasks, threads);
    Table t{kExperimentHeader, {}};
    for (std::size_t i = 0; i < cfg.words.size(); ++i)
        t.rows.push_back(detail::experiment_row(cfg, cfg.words[i], results[i], std::nullopt));
    return t;
}

/// Empirical order between two schedule points, if both errors are nonzero.
inline std::optional<double> order_estimate(const Rational& e_prev, const Rational& e_cur, const Rational& v_prev,
                                            const Rational& v_cur) {
    if (e_prev.is_zero() || e_cur.is_zero())
        return std::nullopt;
    return std::log((e_prev / e_cur).to_double()) / std::log((v_cur / v_prev).to_double());
}

/// For each word and schedule point: error |trace - limit| and order estimate.
inline Table run_converge(const ExperimentConfig& cfg, std::size_t threads = 1) {
    if (cfg.schedule.size() < 3)
        throw ConfigError(0, "at least 3 schedule points are needed to estimate the order");
    std::vector<DiscreteSpace> spaces;
    for (const auto& c : cfg.schedule)
        spaces.push_back(scaled_space(cfg, c));
    std::vector<std::function<detail::Evaluation()>> tasks;
    for (const auto& w : cfg.words)
        for (const auto& sp : spaces)
            tasks.push_back([&cfg, &w, &sp] { return detail::evaluate_word(cfg, sp, w); });
    auto results = parallel_map(tasks, threads);

    Table t{kExperimentHeader, {}};
    std::size_t idx = 0;
    for (const auto& w : cfg.words) {
        for (std::size_t s = 0; s < spaces.size(); ++s, ++idx) {
            const auto& ev = results[idx];
            Cell order;
            if (s > 0) {
                const auto& prev = results[idx - 1];
                if (auto p = order_estimate(abs(prev.value - prev.limit), abs(ev.value - ev.limit), prev.volume,
                                            ev.volume))
                    order = format_order(*p);
            }
            t.rows.push_back(detail::experiment_row(cfg, w, ev, order));
        }
    }
    return t;
}

/// Listing of all set partitions and the non-crossing ones, then both counts.
inline Table run_partitions(const ExperimentConfig& cfg) {
    auto n = cfg.partitions_n;
    auto all = enumerate_set_partitions(n);
    Table t{kPartitionHeader, {}};
    auto ns = std::to_string(n);
    std::size_t nc = 0;
    for (std::size_t i = 0; i < all.size(); ++i)
        t.rows.push_back({"set", ns, std::to_string(i + 1), all[i].str(), std::to_string(all[i].size()), std::nullopt});
    for (const auto& p : all)
        if (p.noncrossing())
            t.rows.push_back({"noncrossing", ns, std::to_string(++nc), p.str(), std::to_string(p.size()), std::nullopt});
    t.rows.push_back({"count_set", ns, std::nullopt, std::nullopt, std::nullopt, std::to_string(all.size())});
    t.rows.push_back({"count_noncrossing", ns, std::nullopt, std::nullopt, std::nullopt, std::to_string(nc)});
    return t;
}

struct OracleReport {
    Table table;
    std::size_t exact_cases = 0;
    std::size_t exact_mismatches = 0;
    Rational max_exact_discrepancy = 0;
    std::size_t float_cases = 0;
    double max_float_discrepancy = 0;
    double tail_tolerance = 0;

    bool ok() const { return exact_mismatches == 0 && max_float_discrepancy <= tail_tolerance; }
};

namespace detail {

inline void for_each_word(std::size_t alphabet, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> w(k, 0);
    while (true) {
        fn(w);
        std::size_t pos = k;
        while (pos > 0 && ++w[pos - 1] == alphabet)
            w[--pos] = 0;
        if (pos == 0)
            return;
    }
}

inline void check_oracle_bounds(const ExperimentConfig& cfg) {
    const auto& o = cfg.oracle;
    if (o.max_particles > kOracleMaxParticles)
        throw ResourceLimitError("oracle max_particles " + std::to_string(o.max_particles) + " exceeds desk bound " +
                                 std::to_string(kOracleMaxParticles));
    if (o.max_word_length > kOracleMaxWordLength || o.poisson_max_word_length > kOracleMaxWordLength ||
        o.freeness_max_word_length > kOracleMaxWordLength)
        throw ResourceLimitError("oracle word length exceeds desk bound " + std::to_string(kOracleMaxWordLength));
    if (cfg.space->size() > kOracleMaxCells)
        throw ResourceLimitError("oracle needs at most " + std::to_string(kOracleMaxCells) + " cells, space has " +
                                 std::to_string(cfg.space->size()));
}

inline bool disjoint(const TestFunction& f, const TestFunction& g) {
    for (std::size_t c = 0; c < f.size(); ++c)
        if (!f[c].is_zero() && !g[c].is_zero())
            return false;
    return true;
}

} // namespace detail

/// Exhaustive comparison of the combinatorial formulas with the operator
/// oracles, plus freeness sweeps. Exact checks must agree exactly; the
/// Poissonized check must agree within the tail tolerance.
inline OracleReport run_oracle_check(const ExperimentConfig& cfg, std::size_t threads = 1) {
    detail::check_oracle_bounds(cfg);
    const auto& o = cfg.oracle;
    const auto& sp = *cfg.space;
    const auto jm = cfg.jumps ? *cfg.jumps : JumpMeasure::unit();
    const auto F = cfg.functions.size();
    auto depth_for = [&](std::size_t k) { return o.depth == 0 ? k : o.depth; };

    struct ExactCase {
        std::string check, word, count;
        std::function<std::pair<Rational, Rational>()> run;
    };
    std::vector<ExactCase> cases;
    for (std::size_t k = 1; k <= o.max_word_length; ++k)
        detail::for_each_word(F, k, [&](const std::vector<std::size_t>& w) {
            auto fs = cfg.word_functions(w);
            for (std::size_t N = 1; N <= o.max_particles; ++N)
                cases.push_back({"fixed_n", cfg.word_label(w), std::to_string(N), [&, fs, N, k] {
                                     ParticleSystemSpec spec{sp, cfg.jumps, FixedCount{static_cast<std::int64_t>(N)}};
                                     return std::pair{fixed_n_trace(spec, fs),
                                                      free_product_vacuum_expectation(sp, cfg.jumps, N, fs, depth_for(k))};
                                 }});
            cases.push_back({"limit", cfg.word_label(w), "", [&, fs, k] {
                                 return std::pair{levy_moment(sp, jm, fs), fock_vacuum_expectation(sp, jm, fs, depth_for(k))};
                             }});
        });

    // freeness across particles: mixed cumulants of oracle (B) word expectations
    if (o.max_particles >= 2 && o.freeness_max_word_length >= 2) {
        auto N = o.max_particles;
        auto pts = std::make_shared<MarkedPoints>(sp, jm);
        auto fns = std::make_shared<std::vector<TestFunction>>(cfg.functions);
        auto cumulants = std::make_shared<FreeCumulants<ParticleLetter>>(
            [pts, fns, N](std::span<const ParticleLetter> w) {
                return free_product_word_expectation(*pts, N, *fns, w, w.size());
            });
        for (std::size_t k = 2; k <= o.freeness_max_word_length; ++k)
            detail::for_each_word(N * F, k, [&](const std::vector<std::size_t>& idx) {
                std::vector<ParticleLetter> w;
                std::string label;
                for (auto i : idx) {
                    w.push_back({i / F, i % F});
                    if (!label.empty())
                        label += ' ';
                    label += cfg.function_names[i % F] + "@" + std::to_string(i / F + 1);
                }
                bool mixed = std::any_of(w.begin(), w.end(), [&](const auto& l) { return l.particle != w[0].particle; });
                if (!mixed)
                    return;
                // the memo is shared, so these cases run in order on one thread
                cases.push_back({"freeness_particles", label, std::to_string(N),
                                 [cumulants, w] { return std::pair{Rational(0), (*cumulants)(w)}; }});
            });
    }

    // freeness across disjoint supports: cumulants of oracle (A) moments
    if (o.freeness_max_word_length >= 2) {
        auto fns = std::make_shared<std::vector<TestFunction>>(cfg.functions);
        auto cumulants = std::make_shared<FreeCumulants<std::size_t>>([&sp, jm, fns](std::span<const std::size_t> w) {
            std::vector<TestFunction> fs;
            for (auto i : w)
                fs.push_back((*fns)[i]);
            return fock_vacuum_expectation(sp, jm, fs, fs.size());
        });
        for (std::size_t k = 2; k <= o.freeness_max_word_length; ++k)
            detail::for_each_word(F, k, [&](const std::vector<std::size_t>& w) {
                bool separated = false;
                for (std::size_t a = 0; a < w.size(); ++a)
                    for (std::size_t b = a + 1; b < w.size(); ++b)
                        separated = separated || detail::disjoint(cfg.functions[w[a]], cfg.functions[w[b]]);
                if (!separated)
                    return;
                cases.push_back({"freeness_supports", cfg.word_label(w), "",
                                 [cumulants, w] { return std::pair{Rational(0), (*cumulants)(w)}; }});
            });
    }

    // Only the independent checks go to the thread pool.
    std::vector<std::function<std::pair<Rational, Rational>()>> parallel;
    std::size_t n_parallel = 0;
    while (n_parallel < cases.size() && cases[n_parallel].check.rfind("freeness", 0) != 0)
        parallel.push_back(cases[n_parallel++].run);
    auto results = parallel_map(parallel, threads);
    for (std::size_t i = n_parallel; i < cases.size(); ++i)
        results.push_back(cases[i].run());

    OracleReport report;
    report.table.header = kOracleHeader;
    report.tail_tolerance = o.tail_tolerance;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& [comb, orac] = results[i];
        auto diff = abs(comb - orac);
        ++report.exact_cases;
        if (!diff.is_zero())
            ++report.exact_mismatches;
        report.max_exact_discrepancy = std::max(report.max_exact_discrepancy, diff);
        Cell count = cases[i].count.empty() ? Cell{} : Cell{cases[i].count};
        report.table.rows.push_back({cases[i].check, cases[i].word, count, comb.str(), orac.str(), diff.str()});
    }

    // Poissonized: exact closed form against the float oracle series
    std::vector<std::vector<std::size_t>> pwords;
    for (std::size_t k = 1; k <= o.poisson_max_word_length; ++k)
        detail::for_each_word(F, k, [&](const std::vector<std::size_t>& w) { pwords.push_back(w); });
    std::vector<std::function<std::pair<Rational, double>()>> ptasks;
    for (const auto& w : pwords)
        ptasks.push_back([&, w] {
            auto fs = cfg.word_functions(w);
            ParticleSystemSpec spec{sp, cfg.jumps, PoissonCount{o.poisson_alpha}};
            auto n_max = poissonized_oracle_n_max(sp, cfg.jumps, o.poisson_alpha, fs, o.tail_tolerance);
            auto series = poissonized_oracle(sp, cfg.jumps, o.poisson_alpha, fs, n_max, o.tail_tolerance,
                                             depth_for(w.size()));
            return std::pair{poissonized_trace(spec, fs), series.value};
        });
    auto presults = parallel_map(ptasks, threads);
    for (std::size_t i = 0; i < pwords.size(); ++i) {
        const auto& [exact, approx] = presults[i];
        double diff = std::abs(exact.to_double() - approx);
        ++report.float_cases;
        report.max_float_discrepancy = std::max(report.max_float_discrepancy, diff);
        report.table.rows.push_back({"poissonized", cfg.word_label(pwords[i]), o.poisson_alpha.str(), exact.str(),
                                     format_double(approx), format_double(diff)});
    }
    return report;
}

} // namespace freepoisson::cli
