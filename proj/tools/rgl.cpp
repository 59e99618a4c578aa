// Command-line runner: rgl <subcommand> --config FILE [--out DIR] [--seed U64] [--workers INT]

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "rgl/experiment.hpp"

namespace {

int default_workers() {
    if (const char* env = std::getenv("RGL_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1) return w;
        } catch (const std::exception&) {
        }
        std::cerr << "rgl: ignoring RGL_WORKERS='" << env << "'\n";
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Riesz and log-gas experiments"};
    app.require_subcommand(1);

    std::string config, config_b, out;
    std::optional<std::uint64_t> seed;
    int workers = default_workers();
    std::optional<std::uint64_t> stop_after;
    bool resume = false;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "experiment configuration (JSON)")->required();
        sub->add_option("--out", out, "base output directory, replaces output.directory");
        sub->add_option("--seed", seed, "overrides sampler.seed");
        sub->add_option("--workers", workers, "worker threads (default RGL_WORKERS or 1)")->check(CLI::PositiveNumber);
    };
    auto* eq = app.add_subcommand("equilibrium", "solve for the equilibrium measure");
    auto* sample = app.add_subcommand("sample", "run the Metropolis chain or tempering ladder");
    auto* analyze = app.add_subcommand("analyze", "microscopic statistics of a sample directory");
    auto* free_energy = app.add_subcommand("free-energy", "thermodynamic integration of log Z");
    auto* compare = app.add_subcommand("compare", "compare the sample directories of two configurations");
    auto* reference = app.add_subcommand("reference", "draw from a reference point process");
    for (auto* s : {eq, sample, analyze, free_energy, compare, reference}) common(s);
    sample->add_option("--stop-after", stop_after, "write checkpoint.json once this many sweeps are done");
    sample->add_flag("--resume", resume, "continue from checkpoint.json");
    compare->add_option("--config-b", config_b, "second configuration")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto cfg = rgl::load_config(config, seed);
        rgl::RunOptions opts;
        opts.out = out;
        opts.workers = workers;
        opts.stop_after = stop_after;
        opts.resume = resume;
        if (eq->parsed()) {
            rgl::cmd_equilibrium(cfg, opts);
        } else if (sample->parsed()) {
            if (!rgl::cmd_sample(cfg, opts)) {
                std::cout << "checkpoint written to " << (rgl::run_directory(cfg, opts) / "checkpoint.json").string()
                          << "\n";
                return 0;
            }
        } else if (analyze->parsed()) {
            rgl::cmd_analyze(cfg, opts);
        } else if (free_energy->parsed()) {
            rgl::cmd_free_energy(cfg, opts);
        } else if (compare->parsed()) {
            const auto other = rgl::load_config(config_b, seed);
            rgl::cmd_compare(cfg, other, opts);
            std::cout << (rgl::run_directory(cfg, opts).parent_path() / ("compare_" + cfg.run_id + "_" + other.run_id)).string()
                      << "\n";
            return 0;
        } else if (reference->parsed()) {
            rgl::cmd_reference(cfg, opts);
        }
        std::cout << rgl::run_directory(cfg, opts).string() << "\n";
    } catch (const rgl::ConvergenceError& e) {
        std::cerr << "rgl: numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return rgl::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "rgl: error: " << e.what() << "\n";
        return rgl::exit_code_for(e);
    }
    return 0;
}
