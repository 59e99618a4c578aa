#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rgl/equilibrium.hpp"
#include "rgl/errors.hpp"
#include "rgl/gas.hpp"

namespace rgl {

/// Invalid or incomplete configuration; the message starts with the field path.
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& path, const std::string& what) : ParameterError(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct FreeEnergyConfig {
    std::vector<int> N_list;
    std::vector<double> lambdas;  // increasing, from 0 to 1
    std::uint64_t n_burn = 2000;
    std::uint64_t n_sweeps = 20000;
    std::uint64_t oracle_budget = 4000;  // quadrature panels or draws for small N
};

struct ReferenceConfig {
    std::string kind;  // poisson, tridiagonal, ginibre, lattice
    int n_samples = 1;
    double intensity = 1.0;  // poisson and lattice
    double side = 100.0;     // window side for the microscopic sources
    std::string lattice = "Z_1D";
};

struct ExperimentConfig {
    KernelSpec kernel;
    PotentialSpec potential;
    double grid_extent = 0.0;
    double grid_h = 0.0;
    SolverOpts solver;

    int N = 1;
    std::vector<double> betas;  // one entry, or the tempering ladder
    bool ladder = false;

    std::uint64_t n_burn = 0, n_sweeps = 0, thin = 0, seed = 0, swap_interval = 1;

    int n_tags = 1;
    double R_w = 1.0;
    std::vector<double> R_list;
    double cell = 1.0;
    double bulk_fraction = 0.5;
    int spacing_bins = 50;
    double max_gap = 5.0;
    double r_max = 0.0;  // pair correlation range, 0 means R_w / 2
    int r_bins = 40;
    int radial_bins = 10;

    std::string directory = "runs";
    std::string run_id = "run";

    std::optional<FreeEnergyConfig> free_energy;
    std::optional<ReferenceConfig> reference;

    /// Canonical JSON text of the effective configuration.
    std::string canonical;
    /// SHA-256 of `canonical`.
    std::string hash;

    GridSpec grid() const { return GridSpec::box(kernel.d, grid_extent, grid_h); }
};

/// Parses and validates a JSON configuration; `seed_override` replaces
/// sampler.seed before hashing. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& file, std::optional<std::uint64_t> seed_override = std::nullopt);

struct RunOptions {
    std::filesystem::path out;  // base directory, overrides output.directory when set
    int workers = 1;
    std::optional<std::uint64_t> stop_after;  // sample: checkpoint at this sweep
    bool resume = false;                       // sample: continue from checkpoint.json
};

std::filesystem::path run_directory(const ExperimentConfig& cfg, const RunOptions& opts);

/// Each command writes into the run directory and finishes with manifest.json.
void cmd_equilibrium(const ExperimentConfig& cfg, const RunOptions& opts);
/// Returns false when it stopped at a checkpoint.
bool cmd_sample(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_analyze(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_free_energy(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_reference(const ExperimentConfig& cfg, const RunOptions& opts);
/// Compares the runs of two configurations; output goes to
/// <base>/compare_<runA>_<runB>.
void cmd_compare(const ExperimentConfig& a, const ExperimentConfig& b, const RunOptions& opts);

/// 2 for configuration and input errors, 3 for numerical failures, 4 for
/// exceeded budgets, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Hex SHA-256 of a byte string and of a file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

/// Equilibrium measure serialization used by equilibrium.json.
std::string equilibrium_to_json(const EquilibriumMeasure& mu);
EquilibriumMeasure equilibrium_from_json(const std::string& text);

}  // namespace rgl
