#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "rgl/grid.hpp"
#include "rgl/kernels.hpp"

namespace rgl::detail {

/// g(h r) expressed through the unit-scale value g(r).
inline double rescale(const KernelSpec& k, double h, double unit_value) {
    if (k.is_log()) return unit_value - std::log(h);
    return std::pow(h, -k.s()) * unit_value;
}

/// Average of g(o + t) against the tent weight prod(1 - |t_i|) on [-1,1]^d,
/// i.e. the mean of g(x - y) over a pair of unit cells offset by o.
double unit_cell_pair(const KernelSpec& k, std::span<const int> o);

/// Mean of g(u - t) over t in the unit cell [-1/2,1/2]^d.
double unit_point_cell(const KernelSpec& k, std::span<const double> u);

/// Dense-free application of the cell interaction matrix
/// K_ij = mean of g over cells i x j, via zero-padded FFT convolution.
/// Holds scratch buffers, so one instance must not be shared across threads.
class CellOperator {
public:
    CellOperator(const GridSpec& grid, const KernelSpec& k);
    ~CellOperator();
    CellOperator(const CellOperator&) = delete;
    CellOperator& operator=(const CellOperator&) = delete;

    /// out = K m, both indexed by flat cell index.
    void apply(std::span<const double> m, std::span<double> out) const;
    double diagonal() const { return diag_; }
    std::size_t size() const { return cells_; }

private:
    struct Plans;
    GridSpec grid_;
    std::size_t cells_ = 0;
    std::size_t padded_ = 0;
    std::size_t spectrum_size_ = 0;
    double diag_ = 0.0;
    std::vector<int> dims_;
    std::vector<std::size_t> pad_index_;
    std::unique_ptr<Plans> plans_;
    std::vector<std::complex<double>> kernel_hat_;
};

}  // namespace rgl::detail
