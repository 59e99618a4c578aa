#include "rgl/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cell_operator.hpp"
#include "rgl/errors.hpp"

namespace rgl {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct Problem {
    const GridSpec& grid;
    const KernelSpec& kernel;
    detail::CellOperator op;
    Vec v;
    std::vector<std::uint8_t> allowed;

    Problem(const GridSpec& g, const PotentialSpec& V, const KernelSpec& k) : grid(g), kernel(k), op(g, k) {
        if (V.d != g.d) throw ParameterError("potential and grid dimensions differ");
        const std::size_t n = g.cell_count();
        v.resize(n);
        allowed.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = V.cell_average(g, i);
            allowed[i] = std::isfinite(v[i]) ? 1 : 0;
        }
    }

    // zero out forbidden cells before use so infinities never enter sums
    double linear(const Vec& m) const {
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] != 0.0) s += v[i] * m[i];
        return s;
    }

    double energy(const Vec& m, Vec& km) const {
        op.apply(m, km);
        return dot(m, km) + linear(m);
    }
};

// Euclidean projection onto the simplex restricted to allowed cells.
void project_simplex(Vec& z, const std::vector<std::uint8_t>& allowed) {
    Vec u;
    u.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        if (allowed[i]) u.push_back(z[i]);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = allowed[i] ? std::max(z[i] - tau, 0.0) : 0.0;
}

// max |zeta| on {m > 0} and max negative zeta over allowed cells, from G = 2Km + v
struct Kkt {
    double lambda = 0.0;
    double on_support = 0.0;
    double negative = 0.0;
};

Kkt kkt(const Problem& p, const Vec& m, const Vec& km) {
    Kkt r;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] > 0.0) r.lambda += m[i] * (2.0 * km[i] + p.v[i]);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!p.allowed[i]) continue;
        const double z = 0.5 * (2.0 * km[i] + p.v[i] - r.lambda);
        if (m[i] > 0.0) r.on_support = std::max(r.on_support, std::abs(z));
        r.negative = std::max(r.negative, -z);
    }
    return r;
}

void accelerated_projected_gradient(const Problem& p, Vec& x, int max_iter, int& iterations) {
    const std::size_t n = x.size();
    Vec y = x, ky(n), kz(n), z(n), grad(n), x_prev = x;
    double L = 1.0;
    double t = 1.0;
    double fy = p.energy(y, ky);
    double fx = fy;
    int stable = 0;
    std::size_t support_prev = 0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = p.allowed[i] ? 2.0 * ky[i] + p.v[i] : 0.0;
        double fz = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) z[i] = y[i] - grad[i] / L;
            project_simplex(z, p.allowed);
            fz = p.energy(z, kz);
            double lin = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dz = z[i] - y[i];
                lin += grad[i] * dz;
                sq += dz * dz;
            }
            if (fz <= fy + lin + 0.5 * L * sq + 1e-14 * std::abs(fy)) break;
            L *= 2.0;
        }
        ++iterations;
        if (fz > fx) {
            // restart momentum from the last accepted point
            t = 1.0;
            y = x;
            fy = p.energy(y, ky);
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        x_prev = x;
        x = z;
        fx = fz;
        for (std::size_t i = 0; i < n; ++i) y[i] = p.allowed[i] ? std::max(x[i] + beta * (x[i] - x_prev[i]), 0.0) : 0.0;
        const double sy = std::accumulate(y.begin(), y.end(), 0.0);
        for (double& e : y) e /= sy;
        t = t_next;
        fy = p.energy(y, ky);
        L *= 0.95;

        std::size_t support = 0;
        for (double e : x)
            if (e > 0.0) ++support;
        stable = support == support_prev ? stable + 1 : 0;
        support_prev = support;
        if (it >= 200 && stable >= 150) break;
    }
}

// Minimizes the energy over {m : m = 0 off S, sum m = 1} starting from a
// feasible m, by conjugate gradients on the sum-zero subspace.
void solve_on_support(const Problem& p, const std::vector<std::uint8_t>& in_s, Vec& m, double abs_tol) {
    const std::size_t n = m.size();
    std::size_t count = 0;
    for (auto b : in_s) count += b;
    if (count <= 1) return;
    auto project = [&](Vec& r) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (in_s[i]) mean += r[i];
        mean /= static_cast<double>(count);
        for (std::size_t i = 0; i < n; ++i) r[i] = in_s[i] ? r[i] - mean : 0.0;
    };
    Vec km(n), res(n), dir(n), kd(n), z(n, 0.0);
    p.op.apply(m, km);
    for (std::size_t i = 0; i < n; ++i) res[i] = in_s[i] ? -(2.0 * km[i] + p.v[i]) : 0.0;
    project(res);
    dir = res;
    double rr = dot(res, res);
    const int max_cg = static_cast<int>(std::min<std::size_t>(count + 100, 20000));
    for (int it = 0; it < max_cg && std::sqrt(rr) > abs_tol; ++it) {
        p.op.apply(dir, kd);
        for (std::size_t i = 0; i < n; ++i) kd[i] *= 2.0;
        project(kd);
        const double dad = dot(dir, kd);
        if (!(dad > 0.0)) break;
        const double alpha = rr / dad;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] += alpha * dir[i];
            res[i] -= alpha * kd[i];
        }
        const double rr_new = dot(res, res);
        const double b = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) dir[i] = res[i] + b * dir[i];
    }
    for (std::size_t i = 0; i < n; ++i) m[i] += z[i];
}

void active_set_polish(const Problem& p, Vec& m, const SolverOpts& opts, double& residual) {
    const std::size_t n = m.size();
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (p.allowed[i]) vmax = std::max(vmax, std::abs(p.v[i]));
    const double cg_tol = 1e-12 * (1.0 + vmax);
    const double add_tol = std::min(1e-9, 1e-4 * opts.tolerance);
    std::vector<std::uint8_t> in_s(n);
    for (std::size_t i = 0; i < n; ++i) in_s[i] = m[i] > 0.0 ? 1 : 0;
    Vec trial(n), km(n);
    std::size_t batch = n;
    for (int round = 0; round < opts.max_active_set_rounds; ++round) {
        trial = m;
        solve_on_support(p, in_s, trial, cg_tol);
        double alpha = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (in_s[i] && trial[i] < 0.0) alpha = std::min(alpha, m[i] / (m[i] - trial[i]));
        if (alpha < 1.0) {
            if (alpha < 1e-12) batch = std::max<std::size_t>(1, batch / 2);
            double mmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!in_s[i]) continue;
                m[i] += alpha * (trial[i] - m[i]);
                mmax = std::max(mmax, m[i]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (in_s[i] && m[i] <= 1e-14 * mmax) {
                    m[i] = 0.0;
                    in_s[i] = 0;
                }
            }
            const double total = std::accumulate(m.begin(), m.end(), 0.0);
            for (double& e : m) e /= total;
            continue;
        }
        m = trial;
        p.op.apply(m, km);
        const Kkt r = kkt(p, m, km);
        residual = std::max(r.on_support, r.negative);
        std::vector<std::pair<double, std::size_t>> violators;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_s[i] || !p.allowed[i]) continue;
            const double z = 0.5 * (2.0 * km[i] + p.v[i] - r.lambda);
            if (z < -add_tol) violators.emplace_back(z, i);
        }
        if (violators.empty()) return;
        std::sort(violators.begin(), violators.end());
        for (std::size_t j = 0; j < std::min(batch, violators.size()); ++j) in_s[violators[j].second] = 1;
    }
    throw ConvergenceError("equilibrium active-set polishing did not settle within " +
                               std::to_string(opts.max_active_set_rounds) + " rounds",
                           residual);
}

EquilibriumMeasure finish(const Problem& p, Vec m, const PotentialSpec& V, double density_floor) {
    const std::size_t n = m.size();
    const double total = std::accumulate(m.begin(), m.end(), 0.0);
    for (double& e : m) e /= total;
    Vec km(n);
    p.op.apply(m, km);
    const double pair = dot(m, km);
    const double lin = p.linear(m);
    EquilibriumMeasure mu;
    mu.kernel = p.kernel;
    mu.potential = V;
    mu.grid = p.grid;
    mu.density_floor = density_floor;
    mu.energy_I = pair + lin;
    mu.frostman_c = pair + 0.5 * lin;
    const double vol = p.grid.cell_volume();
    mu.density.resize(n);
    mu.zeta.resize(n);
    mu.support_mask.assign(n, 0);
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mu.density[i] = m[i] / vol;
        dmax = std::max(dmax, mu.density[i]);
        mu.zeta[i] =
            p.allowed[i] ? km[i] + 0.5 * p.v[i] - mu.frostman_c : std::numeric_limits<double>::infinity();
    }
    std::size_t support = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (mu.density[i] > density_floor * dmax) {
            mu.support_mask[i] = 1;
            ++support;
        }
    }
    mu.sigma_volume = static_cast<double>(support) * vol;
    mu.residuals = frostman_residuals(mu);
    return mu;
}

}  // namespace

double EquilibriumMeasure::mass() const {
    return std::accumulate(density.begin(), density.end(), 0.0) * grid.cell_volume();
}

double mean_field_energy(std::span<const double> density, const GridSpec& grid, const PotentialSpec& V,
                         const KernelSpec& k) {
    if (density.size() != grid.cell_count()) throw InputError("density size does not match the grid");
    const double vol = grid.cell_volume();
    Vec m(density.size());
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (density[i] < 0.0 || !std::isfinite(density[i])) throw InputError("density must be finite and nonnegative");
        m[i] = density[i] * vol;
        total += m[i];
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw InputError("density is not normalized: mass " + std::to_string(total));
    Problem p(grid, V, k);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] > 0.0 && !p.allowed[i]) return std::numeric_limits<double>::infinity();
    Vec km(m.size());
    return p.energy(m, km);
}

EquilibriumMeasure solve_equilibrium(const PotentialSpec& V, const KernelSpec& k, const GridSpec& grid,
                                     const SolverOpts& opts) {
    grid.validate();
    V.validate();
    if (!(opts.tolerance > 0.0)) throw ParameterError("solver tolerance must be positive");
    Problem p(grid, V, k);
    const std::size_t n = grid.cell_count();
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (p.allowed[i]) vmin = std::min(vmin, p.v[i]);
    if (!std::isfinite(vmin)) throw InputError("potential is infinite on the whole grid");
    Vec m(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (p.allowed[i]) m[i] = std::exp(-(p.v[i] - vmin));
    const double total = std::accumulate(m.begin(), m.end(), 0.0);
    for (double& e : m) e /= total;

    int iterations = 0;
    accelerated_projected_gradient(p, m, opts.max_iterations, iterations);
    double residual = std::numeric_limits<double>::infinity();
    active_set_polish(p, m, opts, residual);

    EquilibriumMeasure mu = finish(p, std::move(m), V, opts.density_floor);
    mu.iterations = iterations;
    const double res = std::max(mu.residuals.max_negative_violation, mu.residuals.max_on_support);
    if (!(res <= opts.tolerance))
        throw ConvergenceError("equilibrium solver residual " + std::to_string(res) + " above tolerance", res);
    if (opts.check_boundary) {
        for (std::size_t i = 0; i < n; ++i)
            if (mu.support_mask[i] && grid.on_boundary(i))
                throw ConvergenceError("equilibrium support touches the grid boundary; enlarge grid", res);
    }
    return mu;
}

EquilibriumMeasure evaluate_measure(std::vector<double> density, const GridSpec& grid, const PotentialSpec& V,
                                    const KernelSpec& k, double density_floor) {
    if (density.size() != grid.cell_count()) throw InputError("density size does not match the grid");
    const double vol = grid.cell_volume();
    Vec m(density.size());
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (density[i] < 0.0 || !std::isfinite(density[i])) throw InputError("density must be finite and nonnegative");
        m[i] = density[i] * vol;
        total += m[i];
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw InputError("density is not normalized: mass " + std::to_string(total));
    Problem p(grid, V, k);
    return finish(p, std::move(m), V, density_floor);
}

double potential_of_measure(const EquilibriumMeasure& mu, std::span<const double> x) {
    const GridSpec& g = mu.grid;
    const int d = g.d;
    if (static_cast<int>(x.size()) != d) throw InputError("point has wrong dimension");
    const double vol = g.cell_volume();
    double c[3], u[3];
    double acc = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < mu.density.size(); ++i) {
        const double mi = mu.density[i] * vol;
        if (mi == 0.0) continue;
        g.center(i, std::span<double>(c, static_cast<std::size_t>(d)));
        for (int k = 0; k < d; ++k) u[k] = (x[k] - c[k]) / g.h;
        acc += mi * detail::unit_point_cell(mu.kernel, std::span<const double>(u, static_cast<std::size_t>(d)));
        mass += mi;
    }
    if (mu.kernel.is_log()) return acc - mass * std::log(g.h);
    return std::pow(g.h, -mu.kernel.s()) * acc;
}

double zeta_value(const EquilibriumMeasure& mu, const PotentialSpec& V, std::span<const double> x) {
    const GridSpec& g = mu.grid;
    const int d = g.d;
    if (static_cast<int>(x.size()) != d) throw InputError("point has wrong dimension");
    bool inside = true;
    int base[3];
    double frac[3];
    for (int k = 0; k < d; ++k) {
        const double t = (x[k] - g.lower[k]) / g.h - 0.5;
        if (!(t >= 0.0) || t > g.n[k] - 1) {
            inside = false;
            break;
        }
        int i = static_cast<int>(std::floor(t));
        if (i >= g.n[k] - 1) i = std::max(g.n[k] - 2, 0);
        base[k] = i;
        frac[k] = g.n[k] == 1 ? 0.0 : t - i;
    }
    if (inside) {
        double acc = 0.0;
        bool finite = true;
        int idx[3];
        for (int corner = 0; corner < (1 << d); ++corner) {
            double w = 1.0;
            for (int k = 0; k < d; ++k) {
                const int bit = (corner >> k) & 1;
                w *= bit ? frac[k] : 1.0 - frac[k];
                idx[k] = std::min(base[k] + bit, g.n[k] - 1);
            }
            if (w == 0.0) continue;
            const double z = mu.zeta[g.flatten(std::span<const int>(idx, static_cast<std::size_t>(d)))];
            if (!std::isfinite(z)) finite = false;
            acc += w * z;
        }
        if (finite) return acc;
    }
    return potential_of_measure(mu, x) + 0.5 * V(x) - mu.frostman_c;
}

FrostmanResiduals frostman_residuals(const EquilibriumMeasure& mu) {
    FrostmanResiduals r;
    for (std::size_t i = 0; i < mu.zeta.size(); ++i) {
        const double z = mu.zeta[i];
        if (std::isfinite(z)) r.max_negative_violation = std::max(r.max_negative_violation, -z);
        if (mu.support_mask[i]) r.max_on_support = std::max(r.max_on_support, std::abs(z));
    }
    return r;
}

}  // namespace rgl
