#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rgl/gas.hpp"

namespace rgl {

/// Seed of the `index`-th independent stream derived from `seed`; index 0
/// returns the seed itself.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded generator with a text-serializable state.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);
    double normal() { return normal_(engine_); }
    double uniform() { return std::generate_canonical<double, 53>(engine_); }
    std::uint64_t bits() { return engine_(); }
    std::string state() const;
    void restore(const std::string& s);
    bool operator==(const Rng& o) const { return engine_ == o.engine_ && normal_ == o.normal_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// One Metropolis chain. Energies are cached by component so the chain can
/// target the interpolated Hamiltonian lambda H_N + (1 - lambda) H_ref with
/// H_ref = N sum |x_i|^2 / 2.
struct ChainState {
    Configuration config;
    double pair = 0.0;    // ordered-pair interaction sum
    double sum_v = 0.0;   // sum V(x_i)
    double sum_x2 = 0.0;  // sum |x_i|^2
    Rng rng;
    double step_size = 0.1;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    std::uint64_t sweep = 0;

    double hamiltonian(const GasModel& m) const { return pair + m.N * sum_v; }
    double reference(const GasModel& m) const { return 0.5 * m.N * sum_x2; }
};

/// Fresh chain started from i.i.d. draws of the equilibrium density (or a
/// Gaussian when the model carries none).
ChainState init_chain(const GasModel& m, std::uint64_t seed);
/// Chain started from a given configuration.
ChainState init_chain(const GasModel& m, std::uint64_t seed, Configuration start);

/// Recomputes the cached energy components from scratch.
void resync(ChainState& s, const GasModel& m);

/// N single-particle Gaussian-proposal updates. With `adapt` the step size
/// is nudged toward 30% acceptance after the sweep.
void metropolis_sweep(ChainState& s, const GasModel& m, bool adapt = false, double lambda = 1.0);

struct Diagnostics {
    double acceptance_rate = 0.0;
    std::vector<double> energy_trace;  // H_N after each recorded sweep
    std::vector<double> acceptance_trace;  // accepted fraction of each recorded sweep
    std::vector<double> w_trace;       // W_N per recorded sweep when requested
    double tau = 1.0;                  // integrated autocorrelation time, sweeps
    double step_size = 0.0;
};

struct SampleSet {
    GasModel model;
    std::vector<Configuration> configs;
    std::vector<std::uint64_t> sweep_indices;
    Diagnostics diagnostics;
};

/// Integrated autocorrelation time by batch means with ~sqrt(n) batches.
double integrated_autocorrelation(const std::vector<double>& trace);
/// Batch-means standard error of the mean.
double batch_means_stderr(const std::vector<double>& trace);

struct ChainPlan {
    std::uint64_t n_burn = 1000;
    std::uint64_t n_sweeps = 10000;
    std::uint64_t thin = 10;  // 0 disables snapshots
    double lambda = 1.0;      // coupling of the interpolated Hamiltonian
    bool record_w = false;    // also trace W_N (needs the equilibrium measure)
};

/// Continues `state` through the remaining sweeps of `plan`, appending to
/// `out`. `stop_after` bounds the total sweep counter (for checkpointing).
/// Returns true when the plan completed.
bool advance_chain(ChainState& state, const GasModel& m, const ChainPlan& plan, SampleSet& out,
                   std::optional<std::uint64_t> stop_after = std::nullopt);

/// Finalizes diagnostics of a completed set.
void finalize(SampleSet& set, const ChainState& state);

SampleSet run_chain(const GasModel& m, std::uint64_t n_burn, std::uint64_t n_sweeps, std::uint64_t thin,
                    std::uint64_t seed);

struct TemperingSchedule {
    ChainPlan plan;
    std::uint64_t swap_interval = 1;  // sweeps between swap rounds
    int workers = 1;
};

struct TemperingResult {
    std::vector<SampleSet> rungs;
    std::vector<double> swap_acceptance;  // adjacent pairs (k, k+1)
};

/// Replica exchange over a non-decreasing beta ladder of otherwise identical
/// models. Rung k uses stream derive_seed(seed, k).
TemperingResult parallel_tempering(const std::vector<GasModel>& ladder, const TemperingSchedule& schedule,
                                   std::uint64_t seed);

struct FreeEnergyPlan {
    std::uint64_t n_burn = 2000;
    std::uint64_t n_sweeps = 20000;
    int workers = 1;
};

struct FreeEnergyEstimate {
    double log_z = 0.0;
    double std_error = 0.0;
    double log_z_ref = 0.0;
    std::vector<double> lambdas;
    std::vector<double> means;    // E_lambda[H_N - H_ref]
    std::vector<double> std_errors;
    std::vector<double> taus;
};

/// log Z_ref = (N d / 2) log(pi / a), a = (beta/2) N^{-s/d} N / 2.
double reference_log_partition(const GasModel& m);

/// Thermodynamic integration from the Gaussian reference to H_N over
/// `lambdas` (must contain 0 and 1, increasing), composite Simpson on
/// interval pairs.
FreeEnergyEstimate thermo_integrate_logZ(const GasModel& m, const std::vector<double>& lambdas,
                                         const FreeEnergyPlan& plan, std::uint64_t seed);

struct LogZ {
    double log_z = 0.0;
    double std_error = 0.0;
};

/// Brute-force log Z for N <= 4: tensor Gauss quadrature with `budget`
/// panels per axis when N <= 2 (d = 1, or quadratic V), otherwise importance
/// sampling with `budget` draws from a wide Gaussian.
LogZ exact_logZ_small_N(const GasModel& m, std::uint64_t budget, std::uint64_t seed = 1);

}  // namespace rgl
