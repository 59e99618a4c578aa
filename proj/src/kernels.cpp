#include "rgl/kernels.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "rgl/errors.hpp"

namespace rgl {

double cds_constant(int d, Exponent e) {
    constexpr double pi = std::numbers::pi;
    if (d < 1) throw ParameterError("dimension must be positive, got " + std::to_string(d));
    if (e.log) {
        if (d != 1 && d != 2)
            throw ParameterError("logarithmic kernel requires d in {1,2}, got d=" + std::to_string(d));
        return 2.0 * pi;
    }
    const double s = e.s;
    const double lo = std::max(0.0, d - 2.0);
    if (!(s >= lo && s < d))
        throw ParameterError("Riesz exponent s=" + std::to_string(s) + " outside [max(0,d-2), d)");
    const double half_sphere = 2.0 * std::pow(pi, 0.5 * d);
    if (s > lo) return 2.0 * s * half_sphere * std::tgamma(0.5 * (s + 2.0 - d)) / std::tgamma(0.5 * (s + 2.0));
    if (s > 0.0) return (d - 2.0) * half_sphere / std::tgamma(0.5 * d);  // Coulomb, s = d - 2
    throw ParameterError("s=0 is only admissible as the logarithmic kernel");
}

KernelSpec KernelSpec::logarithmic(int d) {
    const Exponent e = Exponent::logarithmic();
    return {d, e, cds_constant(d, e)};
}

KernelSpec KernelSpec::riesz(int d, double s) {
    const Exponent e = Exponent::riesz(s);
    return {d, e, cds_constant(d, e)};
}

Configuration::Configuration(int dim, Scale sc, std::vector<double> xs)
    : d(dim), scale(sc), coords(std::move(xs)) {
    if (d < 1 || coords.size() % static_cast<std::size_t>(d) != 0)
        throw InputError("coordinate count is not a multiple of the dimension");
}

void Configuration::push_back(std::span<const double> p) {
    if (p.size() != static_cast<std::size_t>(d)) throw InputError("point has wrong dimension");
    coords.insert(coords.end(), p.begin(), p.end());
}

double kernel_value(const KernelSpec& k, double r) {
    if (!(r > 0.0)) throw DomainError("kernel evaluated at r=" + std::to_string(r) + " (coincident points)");
    if (k.exponent.log) return -std::log(r);
    return std::pow(r, -k.exponent.s);
}

Truncation truncated_kernel(const KernelSpec& k, double eta, double r) {
    if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("truncation eta must lie in (0,1)");
    const double g = kernel_value(k, r);
    const double g_eta = kernel_value(k, eta);
    if (r >= eta) return {g, 0.0};
    return {g_eta, g - g_eta};
}

Configuration scale_configuration(const Configuration& c, double m) {
    if (!(m > 0.0)) throw ParameterError("scaling factor must be positive");
    Configuration out = c;
    const double f = std::pow(m, 1.0 / c.d);
    for (double& x : out.coords) x *= f;
    return out;
}

double close_pair_energy(const Configuration& c, const KernelSpec& k, double eta) {
    if (!(eta > 0.0 && eta < 0.5)) throw ParameterError("close-pair eta must lie in (0,1/2)");
    const double cut2 = 4.0 * eta * eta;
    const std::size_t n = c.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r2 = squared_distance(&c.coords[i * c.d], &c.coords[j * c.d], c.d);
            if (r2 <= cut2) total += 2.0 * kernel_from_r2(k, r2);
        }
    }
    return total;
}

}  // namespace rgl
