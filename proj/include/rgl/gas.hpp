#pragma once

#include <memory>
#include <span>

#include "rgl/equilibrium.hpp"
#include "rgl/kernels.hpp"
#include "rgl/potential.hpp"

namespace rgl {

/// A finite-N gas: kernel, confinement, and (optionally) its equilibrium
/// measure, needed only for the splitting.
struct GasModel {
    KernelSpec kernel;
    PotentialSpec V;
    std::shared_ptr<const EquilibriumMeasure> mu;
    int N = 1;
    double beta = 2.0;

    GasModel() = default;
    GasModel(KernelSpec k, PotentialSpec v, std::shared_ptr<const EquilibriumMeasure> m, int n, double b);

    /// beta N^{-s/d}, s = 0 for the logarithmic kernels.
    double effective_beta() const;
    /// (beta/2) N^{-s/d}, the factor in front of H_N in the Gibbs weight.
    double gibbs_factor() const { return 0.5 * effective_beta(); }
    GasModel with_beta(double b) const;
};

struct EnergyBreakdown {
    double H_N = 0.0;
    double leading = 0.0;         // N^2 I(mu_V)
    double log_correction = 0.0;  // -(N/d) log N for log kernels
    double zeta_term = 0.0;       // 2N sum zeta(x_i)
    double W_N = 0.0;
};

/// Sum over ordered pairs i != j of g + N sum V(x_i); +inf on coincidence.
double hamiltonian(const Configuration& c, const GasModel& m);

/// Ordered-pair interaction sum only.
double pair_energy(const Configuration& c, const KernelSpec& k);

double gibbs_log_density(const Configuration& c, const GasModel& m);

/// H_N after x_i <- x_new minus H_N before, in O(N).
double delta_hamiltonian(const Configuration& c, std::size_t i, std::span<const double> x_new, const GasModel& m);

/// Splits H_N into its leading, logarithmic, confinement and next-order
/// parts; W_N is obtained by inverting the identity.
EnergyBreakdown splitting_breakdown(const Configuration& c, const GasModel& m);

/// W_N from an already known H_N; NaN when a point lies far outside the
/// equilibrium grid.
double next_order_energy(double H_N, const Configuration& c, const GasModel& m);

}  // namespace rgl
