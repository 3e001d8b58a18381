#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "freepoisson/cli/config.hpp"
#include "freepoisson/cli/output.hpp"
#include "freepoisson/cli/runner.hpp"

namespace fp = freepoisson;
namespace cli = freepoisson::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;
constexpr int kExitMismatch = 4;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::size_t threads = 1;
    bool seedless = false;
};

int run(cli::Mode mode, const Options& opt) {
    auto cfg = cli::load_config(opt.config, mode);
    if (opt.format)
        cfg.format = *opt.format == "json" ? cli::Format::Json : cli::Format::Csv;
    auto out_path = opt.out ? opt.out : cfg.output_path;

    cli::Table table;
    int code = 0;
    switch (mode) {
    case cli::Mode::Moments:
        table = cli::run_moments(cfg, opt.threads);
        break;
    case cli::Mode::Converge:
        table = cli::run_converge(cfg, opt.threads);
        break;
    case cli::Mode::Partitions:
        table = cli::run_partitions(cfg);
        break;
    case cli::Mode::Oracle: {
        auto report = cli::run_oracle_check(cfg, opt.threads);
        table = std::move(report.table);
        std::cerr << "oracle: " << report.exact_cases << " exact cases, " << report.exact_mismatches
                  << " mismatches, max discrepancy " << report.max_exact_discrepancy.str() << "; "
                  << report.float_cases << " poissonized cases, max |delta| "
                  << cli::format_double(report.max_float_discrepancy) << " (tolerance "
                  << cli::format_double(report.tail_tolerance) << ")\n";
        if (!report.ok())
            code = kExitMismatch;
        break;
    }
    }
    auto text = cli::render(table, cfg.format);
    if (out_path)
        cli::write_file(*out_path, text);
    else
        std::cout << text;
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact moments and free cumulants of free particle systems and their limits"};
    app.require_subcommand(1);
    Options opt;
    std::optional<cli::Mode> chosen;

    for (auto mode : {cli::Mode::Moments, cli::Mode::Converge, cli::Mode::Oracle, cli::Mode::Partitions}) {
        auto* sub = app.add_subcommand(cli::to_string(mode));
        sub->add_option("--config", opt.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output path (default: stdout)");
        sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 256));
        sub->add_flag("--seedless", opt.seedless, "no randomness is used; output is a function of the config");
        sub->callback([&chosen, mode] { chosen = mode; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        return run(*chosen, opt);
    } catch (const fp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fp::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fp::ResourceLimitError& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return kExitResource;
    } catch (const fp::OracleMismatch& e) {
        std::cerr << "oracle mismatch: " << e.what() << '\n';
        return kExitMismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
