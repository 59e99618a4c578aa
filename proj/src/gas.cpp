#include "rgl/gas.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "rgl/errors.hpp"

namespace rgl {

GasModel::GasModel(KernelSpec k, PotentialSpec v, std::shared_ptr<const EquilibriumMeasure> m, int n, double b)
    : kernel(k), V(std::move(v)), mu(std::move(m)), N(n), beta(b) {
    if (N < 1) throw ParameterError("gas needs N >= 1");
    if (!(beta > 0.0)) throw ParameterError("inverse temperature must be positive");
    if (kernel.d != V.d) throw ParameterError("kernel and potential dimensions differ");
    if (mu && (!(mu->kernel == kernel) || !(mu->potential == V)))
        throw ParameterError("equilibrium measure was solved for a different kernel or potential");
}

double GasModel::effective_beta() const { return beta * std::pow(static_cast<double>(N), -kernel.s_over_d()); }

GasModel GasModel::with_beta(double b) const { return GasModel(kernel, V, mu, N, b); }

double pair_energy(const Configuration& c, const KernelSpec& k) {
    const std::size_t n = c.size();
    const int d = c.d;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            total += kernel_from_r2(k, squared_distance(&c.coords[i * d], &c.coords[j * d], d));
    return 2.0 * total;
}

double hamiltonian(const Configuration& c, const GasModel& m) {
    if (static_cast<int>(c.size()) != m.N)
        throw InputError("configuration has " + std::to_string(c.size()) + " points, model expects " +
                         std::to_string(m.N));
    if (c.d != m.kernel.d) throw InputError("configuration dimension does not match the model");
    double v = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) v += m.V(c.point(i));
    return pair_energy(c, m.kernel) + m.N * v;
}

double gibbs_log_density(const Configuration& c, const GasModel& m) { return -m.gibbs_factor() * hamiltonian(c, m); }

double delta_hamiltonian(const Configuration& c, std::size_t i, std::span<const double> x_new, const GasModel& m) {
    if (i >= c.size()) throw InputError("particle index out of range");
    const int d = c.d;
    const double* xo = &c.coords[i * d];
    bool same = true;
    for (int k = 0; k < d; ++k) same = same && xo[k] == x_new[k];
    if (same) return 0.0;
    double dg = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (j == i) continue;
        const double* xj = &c.coords[j * d];
        const double rn = squared_distance(x_new.data(), xj, d);
        if (rn <= 0.0) return std::numeric_limits<double>::infinity();
        dg += kernel_from_r2(m.kernel, rn) - kernel_from_r2(m.kernel, squared_distance(xo, xj, d));
    }
    return 2.0 * dg + m.N * (m.V(x_new) - m.V(c.point(i)));
}

namespace {

std::vector<std::size_t> far_points(const Configuration& c, const GridSpec& g) {
    std::vector<std::size_t> far;
    const int d = g.d;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (int k = 0; k < d; ++k) {
            const double center = 0.5 * (g.lower[k] + g.upper(k));
            const double half = 0.5 * (g.upper(k) - g.lower[k]);
            if (std::abs(c.coords[i * d + k] - center) > 2.0 * half) {
                far.push_back(i);
                break;
            }
        }
    }
    return far;
}

void fill_split(EnergyBreakdown& e, const Configuration& c, const GasModel& m) {
    const EquilibriumMeasure& mu = *m.mu;
    const double N = m.N;
    e.leading = N * N * mu.energy_I;
    e.log_correction = m.kernel.is_log() ? -(N / m.kernel.d) * std::log(N) : 0.0;
    double zs = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) zs += zeta_value(mu, m.V, c.point(i));
    e.zeta_term = 2.0 * N * zs;
    const double scale = std::pow(N, 1.0 + m.kernel.s_over_d());
    e.W_N = (e.H_N - e.leading - e.log_correction - e.zeta_term) / scale;
}

}  // namespace

EnergyBreakdown splitting_breakdown(const Configuration& c, const GasModel& m) {
    if (!m.mu) throw InputError("splitting needs a solved equilibrium measure");
    const auto far = far_points(c, m.mu->grid);
    if (!far.empty()) {
        std::ostringstream os;
        os << "points far outside the equilibrium grid, zeta unavailable for indices:";
        for (std::size_t j = 0; j < far.size() && j < 20; ++j) os << ' ' << far[j];
        if (far.size() > 20) os << " ... (" << far.size() << " total)";
        throw InputError(os.str());
    }
    EnergyBreakdown e;
    e.H_N = hamiltonian(c, m);
    fill_split(e, c, m);
    return e;
}

double next_order_energy(double H_N, const Configuration& c, const GasModel& m) {
    if (!m.mu || !far_points(c, m.mu->grid).empty()) return std::numeric_limits<double>::quiet_NaN();
    EnergyBreakdown e;
    e.H_N = H_N;
    fill_split(e, c, m);
    return e.W_N;
}

}  // namespace rgl
