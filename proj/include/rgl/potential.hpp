#pragma once

#include <span>
#include <vector>

#include "rgl/grid.hpp"

namespace rgl {

/// Confining potential V. QUADRATIC is a|x|^2; TABULATED is a multilinear
/// interpolant of node values and +inf outside its node box.
struct PotentialSpec {
    enum class Kind { Quadratic, Tabulated };
    Kind kind = Kind::Quadratic;
    int d = 1;
    double a = 1.0;
    double offset = 0.0;  // additive constant

    // nodes at lower + i*h, i = 0..n-1 per axis, row-major values
    std::vector<double> lower;
    double h = 0.0;
    std::vector<int> n;
    std::vector<double> values;

    static PotentialSpec quadratic(int d, double a);
    static PotentialSpec tabulated(int d, std::vector<double> lower, double h, std::vector<int> n,
                                   std::vector<double> values);

    double operator()(std::span<const double> x) const;
    /// Average of V over the grid cell `flat`.
    double cell_average(const GridSpec& g, std::size_t flat) const;
    /// Same potential plus a constant.
    PotentialSpec shifted(double kappa) const;

    void validate() const;
    bool operator==(const PotentialSpec&) const = default;
};

}  // namespace rgl
