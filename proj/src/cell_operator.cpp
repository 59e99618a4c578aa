#include "cell_operator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include "quadrature.hpp"
#include "rgl/errors.hpp"

namespace rgl::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// g^{(2j)}(r) for r > 0, j >= 1 (unit scale)
double even_derivative(const KernelSpec& k, double r, int j) {
    if (k.is_log()) {
        double f = 1.0;
        for (int i = 2; i < 2 * j; ++i) f *= i;  // (2j-1)!
        return f / std::pow(r, 2 * j);
    }
    const double s = k.s();
    double f = 1.0;
    for (int i = 0; i < 2 * j; ++i) f *= s + i;
    return f * std::pow(r, -s - 2 * j);
}

double unit_g(const KernelSpec& k, double r) { return k.is_log() ? -std::log(r) : std::pow(r, -k.s()); }

// Phi with Phi'' = g in one dimension
double phi1(const KernelSpec& k, double t) {
    const double a = std::abs(t);
    if (a == 0.0) return 0.0;
    if (k.is_log()) return 0.75 * a * a - 0.5 * a * a * std::log(a);
    const double s = k.s();
    return std::pow(a, 2.0 - s) / ((1.0 - s) * (2.0 - s));
}

// antiderivative of g in one dimension, odd
double anti1(const KernelSpec& k, double t) {
    if (t == 0.0) return 0.0;
    const double a = std::abs(t);
    const double sg = t > 0 ? 1.0 : -1.0;
    if (k.is_log()) return sg * (a - a * std::log(a));
    const double s = k.s();
    return sg * std::pow(a, 1.0 - s) / (1.0 - s);
}

double pair_1d(const KernelSpec& k, int o) {
    const double a = std::abs(o);
    if (a > 20) {
        constexpr double c[] = {1.0 / 12.0, 1.0 / 360.0, 1.0 / 20160.0, 1.0 / 1814400.0};
        double v = unit_g(k, a);
        for (int j = 1; j <= 4; ++j) v += c[j - 1] * even_derivative(k, a, j);
        return v;
    }
    return phi1(k, a + 1) - 2.0 * phi1(k, a) + phi1(k, a - 1);
}

double point_1d(const KernelSpec& k, double u) {
    const double a = std::abs(u);
    if (a > 20) {
        constexpr double c[] = {1.0 / 24.0, 1.0 / 1920.0, 1.0 / 322560.0, 1.0 / 92897280.0};
        double v = unit_g(k, a);
        for (int j = 1; j <= 4; ++j) v += c[j - 1] * even_derivative(k, a, j);
        return v;
    }
    return anti1(k, a + 0.5) - anti1(k, a - 0.5);
}

int graded_levels(const KernelSpec& k) { return k.is_log() ? 40 : 56; }

double pair_nd(const KernelSpec& k, std::span<const int> o) {
    const int d = k.d;
    int maxabs = 0;
    for (int v : o) maxabs = std::max(maxabs, std::abs(v));
    int q = 4;
    if (maxabs <= 3)
        q = 10;
    else if (maxabs <= 8)
        q = 6;
    double off[3];
    for (int i = 0; i < d; ++i) off[i] = o[i];
    auto f = [&](const double* t) {
        double r2 = 0.0, w = 1.0;
        for (int i = 0; i < d; ++i) {
            const double x = off[i] + t[i];
            r2 += x * x;
            w *= 1.0 - std::abs(t[i]);
        }
        if (w <= 0.0) return 0.0;
        return w * kernel_from_r2(k, r2);
    };
    double total = 0.0;
    for (int panel = 0; panel < (1 << d); ++panel) {
        double lo[3], hi[3];
        bool singular = maxabs <= 1;
        bool at_lo[3];
        int vanishing = 0;
        for (int i = 0; i < d; ++i) {
            const bool neg = (panel >> i) & 1;
            lo[i] = neg ? -1.0 : 0.0;
            hi[i] = neg ? 0.0 : 1.0;
            const double ts = -off[i];
            if (ts < lo[i] || ts > hi[i]) singular = false;
            at_lo[i] = ts == lo[i];
            if (ts != 0.0) ++vanishing;
        }
        if (singular) {
            const double ratio = k.is_log() ? 0.0 : std::pow(2.0, k.s() - d - vanishing);
            total += corner_graded(f, lo, hi, at_lo, d, 8, graded_levels(k), ratio);
        } else {
            total += box_gauss(f, lo, hi, d, q);
        }
    }
    return total;
}

double point_nd(const KernelSpec& k, std::span<const double> u) {
    const int d = k.d;
    double maxabs = 0.0;
    for (int i = 0; i < d; ++i) maxabs = std::max(maxabs, std::abs(u[i]));
    auto f = [&](const double* t) {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double x = u[i] - t[i];
            r2 += x * x;
        }
        return kernel_from_r2(k, r2);
    };
    double lo[3], hi[3];
    for (int i = 0; i < d; ++i) {
        lo[i] = -0.5;
        hi[i] = 0.5;
    }
    if (maxabs > 8) return box_gauss(f, lo, hi, d, 4);
    if (maxabs > 3) return box_gauss(f, lo, hi, d, 6);
    if (maxabs > 1) return box_gauss(f, lo, hi, d, 10);
    // split the cell at the projection p of u; every piece has p as a corner
    double p[3];
    for (int i = 0; i < d; ++i) p[i] = std::clamp(u[i], -0.5, 0.5);
    const double ratio = k.is_log() ? 0.0 : std::pow(2.0, k.s() - d);
    double total = 0.0;
    for (int piece = 0; piece < (1 << d); ++piece) {
        double sl[3], sh[3];
        bool at_lo[3];
        bool empty = false;
        for (int i = 0; i < d; ++i) {
            if ((piece >> i) & 1) {
                sl[i] = -0.5;
                sh[i] = p[i];
                at_lo[i] = false;
            } else {
                sl[i] = p[i];
                sh[i] = 0.5;
                at_lo[i] = true;
            }
            if (sh[i] - sl[i] <= 0.0) empty = true;
        }
        if (empty) continue;
        total += corner_graded(f, sl, sh, at_lo, d, 8, graded_levels(k), ratio);
    }
    return total;
}

}  // namespace

double unit_cell_pair(const KernelSpec& k, std::span<const int> o) {
    if (k.d == 1) return pair_1d(k, o[0]);
    return pair_nd(k, o);
}

double unit_point_cell(const KernelSpec& k, std::span<const double> u) {
    if (k.d == 1) return point_1d(k, u[0]);
    return point_nd(k, u);
}

struct CellOperator::Plans {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
};

CellOperator::CellOperator(const GridSpec& grid, const KernelSpec& k) : grid_(grid) {
    grid.validate();
    if (grid.d != k.d) throw ParameterError("grid and kernel dimensions differ");
    const int d = grid.d;
    cells_ = grid.cell_count();
    dims_.resize(d);
    padded_ = 1;
    for (int i = 0; i < d; ++i) {
        dims_[i] = 2 * grid.n[i];
        padded_ *= static_cast<std::size_t>(dims_[i]);
    }
    spectrum_size_ = padded_ / static_cast<std::size_t>(dims_[d - 1]) * static_cast<std::size_t>(dims_[d - 1] / 2 + 1);

    plans_ = std::make_unique<Plans>();
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plans_->real = fftw_alloc_real(padded_);
        plans_->spec = fftw_alloc_complex(spectrum_size_);
        plans_->forward = fftw_plan_dft_r2c(d, dims_.data(), plans_->real, plans_->spec, FFTW_ESTIMATE);
        plans_->backward = fftw_plan_dft_c2r(d, dims_.data(), plans_->spec, plans_->real, FFTW_ESTIMATE);
    }
    if (!plans_->forward || !plans_->backward) throw Error("FFT planning failed");

    // unit-scale table over absolute offsets; radial symmetry lets sorted
    // offsets share a value
    std::map<std::array<int, 3>, double> memo;
    std::vector<int> idx(d), absoff(d);
    double* c = plans_->real;
    for (std::size_t flat = 0; flat < padded_; ++flat) {
        std::size_t rem = flat;
        bool unused = false;
        for (int i = d - 1; i >= 0; --i) {
            const int j = static_cast<int>(rem % static_cast<std::size_t>(dims_[i]));
            rem /= static_cast<std::size_t>(dims_[i]);
            const int n = grid.n[i];
            if (j == n) unused = true;
            absoff[i] = j < n ? j : dims_[i] - j;
        }
        if (unused) {
            c[flat] = 0.0;
            continue;
        }
        std::array<int, 3> key{0, 0, 0};
        for (int i = 0; i < d; ++i) key[i] = absoff[i];
        std::sort(key.begin(), key.begin() + d);
        auto it = memo.find(key);
        double u;
        if (it != memo.end()) {
            u = it->second;
        } else {
            u = unit_cell_pair(k, std::span<const int>(key.data(), static_cast<std::size_t>(d)));
            memo.emplace(key, u);
        }
        c[flat] = rescale(k, grid.h, u);
    }
    diag_ = c[0];
    pad_index_.resize(cells_);
    for (std::size_t flat = 0; flat < cells_; ++flat) {
        grid.unflatten(flat, idx);
        std::size_t p = 0;
        for (int i = 0; i < d; ++i) p = p * static_cast<std::size_t>(dims_[i]) + static_cast<std::size_t>(idx[i]);
        pad_index_[flat] = p;
    }
    fftw_execute(plans_->forward);
    kernel_hat_.resize(spectrum_size_);
    for (std::size_t i = 0; i < spectrum_size_; ++i)
        kernel_hat_[i] = {plans_->spec[i][0], plans_->spec[i][1]};
}

CellOperator::~CellOperator() = default;

void CellOperator::apply(std::span<const double> m, std::span<double> out) const {
    double* buf = plans_->real;
    std::memset(buf, 0, sizeof(double) * padded_);
    for (std::size_t flat = 0; flat < cells_; ++flat) buf[pad_index_[flat]] = m[flat];
    fftw_execute(plans_->forward);
    for (std::size_t i = 0; i < spectrum_size_; ++i) {
        const std::complex<double> z(plans_->spec[i][0], plans_->spec[i][1]);
        const std::complex<double> r = z * kernel_hat_[i];
        plans_->spec[i][0] = r.real();
        plans_->spec[i][1] = r.imag();
    }
    fftw_execute(plans_->backward);
    const double scale = 1.0 / static_cast<double>(padded_);
    for (std::size_t flat = 0; flat < cells_; ++flat) out[flat] = buf[pad_index_[flat]] * scale;
}

}  // namespace rgl::detail
