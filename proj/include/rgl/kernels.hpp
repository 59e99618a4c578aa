#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace rgl {

/// Exponent of the interaction: either -log|x| or |x|^{-s}.
struct Exponent {
    bool log = true;
    double s = 0.0;  // ignored when log is set

    static Exponent logarithmic() { return {true, 0.0}; }
    static Exponent riesz(double s) { return {false, s}; }

    bool operator==(const Exponent&) const = default;
};

/// c_{d,s}; throws ParameterError for inadmissible (d, s).
double cds_constant(int d, Exponent e);

/// The interaction law g in dimension d.
struct KernelSpec {
    int d = 1;
    Exponent exponent;
    double cds = 0.0;

    /// -log|x| in d = 1 or 2.
    static KernelSpec logarithmic(int d);
    /// |x|^{-s} with max(0, d-2) <= s < d.
    static KernelSpec riesz(int d, double s);

    bool is_log() const { return exponent.log; }
    /// s for Riesz kernels and 0 for the logarithmic ones.
    double s() const { return exponent.log ? 0.0 : exponent.s; }
    /// s/d, the exponent of N in the temperature scaling.
    double s_over_d() const { return s() / d; }

    bool operator==(const KernelSpec& o) const { return d == o.d && exponent == o.exponent; }
};

enum class Scale { Macro, Micro };

/// Ordered list of d-dimensional points stored contiguously.
struct Configuration {
    int d = 1;
    Scale scale = Scale::Macro;
    std::vector<double> coords;

    Configuration() = default;
    Configuration(int dim, Scale sc) : d(dim), scale(sc) {}
    Configuration(int dim, Scale sc, std::vector<double> xs);

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(d); }
    bool empty() const { return coords.empty(); }
    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    std::span<double> point(std::size_t i) {
        return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    void push_back(std::span<const double> p);

    bool operator==(const Configuration&) const = default;
};

inline double squared_distance(const double* a, const double* b, int d) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        r2 += t * t;
    }
    return r2;
}

/// g evaluated from a squared distance; +inf at r2 == 0.
inline double kernel_from_r2(const KernelSpec& k, double r2) {
    if (r2 <= 0.0) return std::numeric_limits<double>::infinity();
    if (k.exponent.log) return -0.5 * std::log(r2);
    const double s = k.exponent.s;
    if (s == 1.0) return 1.0 / std::sqrt(r2);
    if (s == 0.0) return 1.0;
    return std::exp(-0.5 * s * std::log(r2));
}

/// g(r): -log r or r^{-s}. Throws DomainError for r <= 0.
double kernel_value(const KernelSpec& k, double r);

struct Truncation {
    double g_eta;  // min(g(r), g(eta))
    double f_eta;  // (g(r) - g(eta))_+
};

/// Truncated kernel g_eta and remainder f_eta at radius r, eta in (0, 1).
Truncation truncated_kernel(const KernelSpec& k, double eta, double r);

/// Multiplies every coordinate by m^{1/d}; the scale tag is kept.
Configuration scale_configuration(const Configuration& c, double m);

/// Sum over ordered pairs i != j with |x_i - x_j| <= 2 eta of g(|x_i - x_j|).
/// Coincident points give +inf. Requires eta in (0, 1/2).
double close_pair_energy(const Configuration& c, const KernelSpec& k, double eta);

inline bool is_flagged(double v) { return std::isinf(v) || std::isnan(v); }

}  // namespace rgl
