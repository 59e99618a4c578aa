#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rgl {

/// Uniform cell-centred grid on an axis-aligned box, row-major with the last
/// axis fastest.
struct GridSpec {
    int d = 1;
    std::vector<double> lower;  // lower corner of the box
    double h = 0.0;             // cell side
    std::vector<int> n;         // cells per axis

    /// Grid on [-extent, extent]^d with spacing h; the cell count per axis is
    /// rounded to the nearest integer and the box is re-centred.
    static GridSpec box(int d, double extent, double h);
    /// Grid on [-extent, extent]^d with `cells` cells per axis.
    static GridSpec box_cells(int d, double extent, int cells);

    std::size_t cell_count() const;
    double cell_volume() const;
    double upper(int axis) const { return lower[axis] + n[axis] * h; }
    double center(int axis, int i) const { return lower[axis] + (i + 0.5) * h; }
    void center(std::size_t flat, std::span<double> out) const;
    void unflatten(std::size_t flat, std::span<int> idx) const;
    std::size_t flatten(std::span<const int> idx) const;
    /// True when the cell touches the outer face of the box.
    bool on_boundary(std::size_t flat) const;
    /// Point lies inside the closed box.
    bool contains(std::span<const double> x) const;

    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

}  // namespace rgl
