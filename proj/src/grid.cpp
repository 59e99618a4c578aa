#include "rgl/grid.hpp"

#include <cmath>
#include <string>

#include "rgl/errors.hpp"

namespace rgl {

GridSpec GridSpec::box(int d, double extent, double h) {
    if (!(h > 0.0) || !(extent > 0.0)) throw ParameterError("grid extent and spacing must be positive");
    const int cells = static_cast<int>(std::lround(2.0 * extent / h));
    GridSpec g;
    g.d = d;
    g.h = h;
    g.n.assign(d, std::max(cells, 1));
    g.lower.assign(d, -0.5 * g.n[0] * h);
    g.validate();
    return g;
}

GridSpec GridSpec::box_cells(int d, double extent, int cells) {
    if (cells < 1 || !(extent > 0.0)) throw ParameterError("grid needs positive extent and cell count");
    GridSpec g;
    g.d = d;
    g.h = 2.0 * extent / cells;
    g.n.assign(d, cells);
    g.lower.assign(d, -extent);
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (d < 1 || d > 3) throw ParameterError("grids are supported for d in {1,2,3}, got " + std::to_string(d));
    if (static_cast<int>(lower.size()) != d || static_cast<int>(n.size()) != d)
        throw ParameterError("grid lower/n arrays do not match the dimension");
    if (!(h > 0.0)) throw ParameterError("grid spacing must be positive");
    for (int v : n)
        if (v < 1) throw ParameterError("grid needs at least one cell per axis");
}

std::size_t GridSpec::cell_count() const {
    std::size_t c = 1;
    for (int v : n) c *= static_cast<std::size_t>(v);
    return c;
}

double GridSpec::cell_volume() const { return std::pow(h, d); }

void GridSpec::unflatten(std::size_t flat, std::span<int> idx) const {
    for (int k = d - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(flat % static_cast<std::size_t>(n[k]));
        flat /= static_cast<std::size_t>(n[k]);
    }
}

std::size_t GridSpec::flatten(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) flat = flat * static_cast<std::size_t>(n[k]) + static_cast<std::size_t>(idx[k]);
    return flat;
}

void GridSpec::center(std::size_t flat, std::span<double> out) const {
    for (int k = d - 1; k >= 0; --k) {
        const int i = static_cast<int>(flat % static_cast<std::size_t>(n[k]));
        flat /= static_cast<std::size_t>(n[k]);
        out[k] = center(k, i);
    }
}

bool GridSpec::on_boundary(std::size_t flat) const {
    for (int k = d - 1; k >= 0; --k) {
        const int i = static_cast<int>(flat % static_cast<std::size_t>(n[k]));
        flat /= static_cast<std::size_t>(n[k]);
        if (i == 0 || i == n[k] - 1) return true;
    }
    return false;
}

bool GridSpec::contains(std::span<const double> x) const {
    for (int k = 0; k < d; ++k)
        if (x[k] < lower[k] || x[k] > upper(k)) return false;
    return true;
}

}  // namespace rgl
