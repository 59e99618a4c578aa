#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgl/equilibrium.hpp"
#include "rgl/kernels.hpp"

namespace rgl {

/// Axis-aligned half-open box [center - side/2, center + side/2).
struct Window {
    std::vector<double> center;
    std::vector<double> side;

    Window() = default;
    Window(std::vector<double> c, std::vector<double> s);
    /// Cube of side 2R centred at the origin.
    static Window cube(int d, double R);

    int d() const { return static_cast<int>(center.size()); }
    double volume() const;
    double lower(int k) const { return center[k] - 0.5 * side[k]; }
    double upper(int k) const { return center[k] + 0.5 * side[k]; }
    bool contains(std::span<const double> x) const;
};

/// Homogeneous Poisson process of the given intensity restricted to `w`.
Configuration sample_poisson(double intensity, const Window& w, std::uint64_t seed);

/// Eigenvalues of the tridiagonal beta-Hermite matrix, scaled so the points
/// follow the gas with V(x) = a x^2 exactly (semicircle of radius sqrt(2/a)).
Configuration sample_beta_hermite(int N, double beta, std::uint64_t seed, double a = 1.0);

/// Eigenvalues of an N x N complex Gaussian matrix with E|A_ij|^2 = 1/N: the
/// beta = 2 planar log-gas with V(z) = |z|^2, filling the unit disk.
Configuration sample_ginibre(int N, std::uint64_t seed);
constexpr int kGinibreMaxN = 1024;

enum class LatticeKind { Z_1D, SQUARE_2D, TRIANGULAR_2D };
LatticeKind lattice_kind_from_string(const std::string& s);
std::string to_string(LatticeKind k);

/// Lattice points of density m inside `w`. Points sit at centres of the
/// fundamental cells anchored at the origin, so Z_1D with m = 1 gives the
/// half-integers.
Configuration lattice_config(LatticeKind kind, double m, const Window& w);

/// x_i = F^{-1}((i - 1/2) / N) for the cell-constant density of a 1D measure.
Configuration quantile_config(const EquilibriumMeasure& mu, int N);

/// Closed-form log partition function of the 1D log-gas with V = a x^2
/// (Mehta integral), in the normalization of GasModel.
double beta_hermite_log_partition(int N, double beta, double a = 1.0);

}  // namespace rgl
