#include "rgl/potential.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "quadrature.hpp"
#include "rgl/errors.hpp"

namespace rgl {

PotentialSpec PotentialSpec::quadratic(int d, double a) {
    PotentialSpec v;
    v.kind = Kind::Quadratic;
    v.d = d;
    v.a = a;
    v.validate();
    return v;
}

PotentialSpec PotentialSpec::tabulated(int d, std::vector<double> lower, double h, std::vector<int> n,
                                       std::vector<double> values) {
    PotentialSpec v;
    v.kind = Kind::Tabulated;
    v.d = d;
    v.lower = std::move(lower);
    v.h = h;
    v.n = std::move(n);
    v.values = std::move(values);
    v.validate();
    return v;
}

void PotentialSpec::validate() const {
    if (d < 1 || d > 3) throw ParameterError("potential dimension must be 1, 2 or 3");
    if (kind == Kind::Quadratic) {
        if (!(a > 0.0)) throw ParameterError("quadratic potential needs a > 0");
        return;
    }
    if (static_cast<int>(lower.size()) != d || static_cast<int>(n.size()) != d)
        throw ParameterError("tabulated potential node box does not match the dimension");
    if (!(h > 0.0)) throw ParameterError("tabulated potential spacing must be positive");
    std::size_t count = 1;
    for (int v : n) {
        if (v < 2) throw ParameterError("tabulated potential needs at least two nodes per axis");
        count *= static_cast<std::size_t>(v);
    }
    if (values.size() != count)
        throw ParameterError("tabulated potential has " + std::to_string(values.size()) + " values, expected " +
                             std::to_string(count));
    for (double v : values)
        if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
            throw ParameterError("tabulated potential must be bounded below");
}

double PotentialSpec::operator()(std::span<const double> x) const {
    if (kind == Kind::Quadratic) {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
        return a * r2 + offset;
    }
    int base[3];
    double frac[3];
    for (int k = 0; k < d; ++k) {
        const double u = (x[k] - lower[k]) / h;
        if (!(u >= 0.0) || u > n[k] - 1) return std::numeric_limits<double>::infinity();
        int i = static_cast<int>(std::floor(u));
        if (i >= n[k] - 1) i = n[k] - 2;
        base[k] = i;
        frac[k] = u - i;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int k = 0; k < d; ++k) {
            const int bit = (corner >> k) & 1;
            w *= bit ? frac[k] : 1.0 - frac[k];
            flat = flat * static_cast<std::size_t>(n[k]) + static_cast<std::size_t>(base[k] + bit);
        }
        if (w == 0.0) continue;
        acc += w * values[flat];
    }
    return acc + offset;
}

double PotentialSpec::cell_average(const GridSpec& g, std::size_t flat) const {
    double c[3];
    g.center(flat, std::span<double>(c, static_cast<std::size_t>(g.d)));
    if (kind == Kind::Quadratic) {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) r2 += c[k] * c[k];
        return a * (r2 + d * g.h * g.h / 12.0) + offset;
    }
    double lo[3], hi[3];
    for (int k = 0; k < d; ++k) {
        lo[k] = c[k] - 0.5 * g.h;
        hi[k] = c[k] + 0.5 * g.h;
    }
    const int dim = d;
    return detail::box_gauss(
        [this, dim](const double* t) { return (*this)(std::span<const double>(t, static_cast<std::size_t>(dim))); },
        lo, hi, d, 4) /
           g.cell_volume();
}

PotentialSpec PotentialSpec::shifted(double kappa) const {
    PotentialSpec v = *this;
    v.offset += kappa;
    return v;
}

}  // namespace rgl
