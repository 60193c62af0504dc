#include "netrate/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace netrate;

namespace {

struct Args {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::vector<std::string> csvs;
    std::string mutate;
    bool quick = false;
};

ExperimentConfig config_for(const Args& a) {
    if (a.config.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = load_config(a.config);
    if (a.seed) cfg.seeds = {*a.seed, *a.seed + 1, *a.seed + 2};
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rate bounds and ECDQ simulation for LTI networked control over delayed channels"};
    app.require_subcommand(1);
    Args a;
    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", a.config, "experiment config (ini)");
        sc->add_option("--out", a.out, "output directory");
        sc->add_option("--seed", a.seed, "base seed; noise/dither/delay become N, N+1, N+2");
        sc->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* bounds = app.add_subcommand("bounds", "write bounds.csv over the (h, D) grid");
    auto* simulate = app.add_subcommand("simulate", "simulate ECDQ schemes, write simulate.csv");
    auto* plot = app.add_subcommand("plot", "render CSV tables to plot.svg");
    auto* verify = app.add_subcommand("verify", "run the oracle and property checks");
    for (auto* sc : {bounds, simulate, plot, verify}) common(sc);
    plot->add_option("csv", a.csvs, "bounds/simulate CSV files")->required();
    verify->add_option("--mutate", a.mutate)->group("");
    verify->add_flag("--quick", a.quick, "smaller random samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        CommandOptions opt;
        opt.jobs = a.jobs;
        opt.out_dir = a.out;
        opt.log = &std::cerr;
        if (*bounds) return cmd_bounds(config_for(a), opt);
        if (*simulate) return cmd_simulate(config_for(a), opt);
        if (*plot) {
            std::vector<std::filesystem::path> csvs(a.csvs.begin(), a.csvs.end());
            const std::filesystem::path dir = a.out.empty() ? std::filesystem::path(".") : std::filesystem::path(a.out);
            return cmd_plot(csvs, dir / "plot.svg");
        }
        return cmd_verify({a.mutate, a.quick}, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
}
