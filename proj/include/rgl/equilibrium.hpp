#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rgl/grid.hpp"
#include "rgl/kernels.hpp"
#include "rgl/potential.hpp"

namespace rgl {

struct SolverOpts {
    double tolerance = 5e-3;       // Frostman certificate target
    int max_iterations = 4000;     // projected-gradient sweeps before polishing
    int max_active_set_rounds = 400;
    double density_floor = 1e-6;   // support threshold relative to the max density
    bool check_boundary = true;    // reject supports touching the grid boundary
};

struct FrostmanResiduals {
    double max_negative_violation = 0.0;  // max(0, -min zeta)
    double max_on_support = 0.0;          // max |zeta| on the support mask
};

/// Discretized minimizer of the mean-field energy, cell-centred on `grid`.
struct EquilibriumMeasure {
    KernelSpec kernel;
    PotentialSpec potential;
    GridSpec grid;
    std::vector<double> density;             // per unit volume
    std::vector<double> zeta;                // cell averages of zeta
    std::vector<std::uint8_t> support_mask;
    double energy_I = 0.0;
    double frostman_c = 0.0;
    double sigma_volume = 0.0;
    double density_floor = 1e-6;
    FrostmanResiduals residuals;
    int iterations = 0;

    double mass() const;
};

/// I(mu) = double integral of g + integral of V for a cell density on `grid`.
double mean_field_energy(std::span<const double> density, const GridSpec& grid, const PotentialSpec& V,
                         const KernelSpec& k);

EquilibriumMeasure solve_equilibrium(const PotentialSpec& V, const KernelSpec& k, const GridSpec& grid,
                                     const SolverOpts& opts = {});

/// Fills energy, c, zeta and the support for a supplied density without
/// optimizing; used to certify hand-made densities.
EquilibriumMeasure evaluate_measure(std::vector<double> density, const GridSpec& grid, const PotentialSpec& V,
                                    const KernelSpec& k, double density_floor = 1e-6);

/// H^mu(x), exact cell averages of g summed over the grid.
double potential_of_measure(const EquilibriumMeasure& mu, std::span<const double> x);

/// H^mu(x) + V(x)/2 - c. Inside the grid the stored zeta is interpolated.
double zeta_value(const EquilibriumMeasure& mu, const PotentialSpec& V, std::span<const double> x);

FrostmanResiduals frostman_residuals(const EquilibriumMeasure& mu);

}  // namespace rgl
