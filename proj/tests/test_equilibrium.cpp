#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "rgl/equilibrium.hpp"
#include "rgl/errors.hpp"

using namespace rgl;

namespace {

constexpr double pi = std::numbers::pi;

// primitive of (1/(2 pi R^2/4)) sqrt(R^2 - x^2) for the semicircle of radius R
double semicircle_cdf(double x, double R) {
    if (x <= -R) return 0.0;
    if (x >= R) return 1.0;
    const double t = x / R;
    return 0.5 + (t * std::sqrt(1 - t * t) + std::asin(t)) / pi;
}

std::vector<double> semicircle_cells(const GridSpec& g, double R) {
    std::vector<double> d(g.cell_count());
    for (int i = 0; i < g.n[0]; ++i) {
        const double a = g.lower[0] + i * g.h;
        d[i] = (semicircle_cdf(a + g.h, R) - semicircle_cdf(a, R)) / g.h;
    }
    return d;
}

PotentialSpec flat_potential(double lo, double hi) {
    return PotentialSpec::tabulated(1, {lo}, hi - lo, {2}, {0.0, 0.0});
}

double l1_to_semicircle(const EquilibriumMeasure& mu, double R) {
    const auto exact = semicircle_cells(mu.grid, R);
    double e = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) e += std::abs(mu.density[i] - exact[i]) * mu.grid.h;
    return e;
}

const EquilibriumMeasure& semicircle_solution() {
    static const EquilibriumMeasure mu = solve_equilibrium(PotentialSpec::quadratic(1, 0.5), KernelSpec::logarithmic(1),
                                                           GridSpec::box_cells(1, 2.5, 2000));
    return mu;
}

}  // namespace

TEST_CASE("mean-field energy of the uniform law on [0,1]") {
    GridSpec g;
    g.d = 1;
    g.lower = {0.0};
    g.h = 0.01;
    g.n = {100};
    std::vector<double> dens(100, 1.0);
    const auto V = flat_potential(-1.0, 2.0);
    CHECK(mean_field_energy(dens, g, V, KernelSpec::logarithmic(1)) == doctest::Approx(1.5).epsilon(1e-12));
    // a constant shift of V moves the energy by exactly that constant
    CHECK(mean_field_energy(dens, g, V.shifted(0.37), KernelSpec::logarithmic(1)) ==
          doctest::Approx(1.5 + 0.37).epsilon(1e-12));
    dens[3] = 5.0;
    CHECK_THROWS_AS(mean_field_energy(dens, g, V, KernelSpec::logarithmic(1)), InputError);
}

TEST_CASE("mean-field energy of the semicircle against brute force") {
    const auto g = GridSpec::box_cells(1, 2.2, 800);
    const auto dens = semicircle_cells(g, 2.0);
    const double e = mean_field_energy(dens, g, PotentialSpec::quadratic(1, 0.5), KernelSpec::logarithmic(1));
    // staggered midpoint double sum avoids the diagonal; independent of the cell tables
    const int M = 3000;
    std::vector<double> x(M), w(M), y(M), wy(M);
    for (int i = 0; i < M; ++i) {
        const double a = -2.0 + 4.0 * i / M, b = -2.0 + 4.0 * (i + 1) / M;
        x[i] = 0.5 * (a + b);
        w[i] = semicircle_cdf(b, 2.0) - semicircle_cdf(a, 2.0);
        const double a2 = -2.0 + 4.0 * (i + 0.5) / M, b2 = std::min(2.0, a2 + 4.0 / M);
        y[i] = 0.5 * (a2 + b2);
        wy[i] = semicircle_cdf(b2, 2.0) - semicircle_cdf(a2, 2.0);
    }
    wy[0] += semicircle_cdf(-2.0 + 2.0 / M, 2.0);
    double pair = 0.0, lin = 0.0;
    for (int i = 0; i < M; ++i) {
        lin += w[i] * 0.5 * x[i] * x[i];
        for (int j = 0; j < M; ++j) pair += w[i] * wy[j] * -std::log(std::abs(x[i] - y[j]));
    }
    CHECK(std::abs(e - (pair + lin)) < 1e-3);
    CHECK(std::abs(e - 0.75) < 1e-3);
}

TEST_CASE("golden semicircle") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& mu = semicircle_solution();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("solve time " << secs << " s, iterations " << mu.iterations);
    CHECK(secs < 60.0);
    const auto& g = mu.grid;
    CHECK(std::abs(mu.mass() - 1.0) < 1e-8);
    CHECK(l1_to_semicircle(mu, 2.0) < 1e-2);
    CHECK(mu.residuals.max_negative_violation <= 5e-3);
    CHECK(mu.residuals.max_on_support <= 5e-3);
    // density at the centre, support edges
    const std::size_t mid = g.cell_count() / 2;
    CHECK(0.5 * (mu.density[mid - 1] + mu.density[mid]) == doctest::Approx(1.0 / pi).epsilon(2e-3));
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        if (mu.support_mask[i]) {
            lo = std::min(lo, g.center(0, static_cast<int>(i)));
            hi = std::max(hi, g.center(0, static_cast<int>(i)));
        }
    CHECK(std::abs(lo + 2.0) < 0.01);
    CHECK(std::abs(hi - 2.0) < 0.01);
    CHECK(mu.energy_I == doctest::Approx(0.75).epsilon(1e-4));
    CHECK(mu.frostman_c == doctest::Approx(0.75 - 0.5 * 0.5).epsilon(1e-4));
    // even V gives a reflection-symmetric density
    double asym = 0.0;
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        asym = std::max(asym, std::abs(mu.density[i] - mu.density[g.cell_count() - 1 - i]));
    CHECK(asym <= 1e-10);
}

TEST_CASE("quadratic V = x^2 gives the semicircle of radius sqrt 2") {
    const auto mu = solve_equilibrium(PotentialSpec::quadratic(1, 1.0), KernelSpec::logarithmic(1),
                                      GridSpec::box_cells(1, 2.0, 1000));
    CHECK(l1_to_semicircle(mu, std::sqrt(2.0)) < 1e-2);
    CHECK(mu.energy_I == doctest::Approx(0.75 + 0.5 * std::log(2.0)).epsilon(1e-4));
}

TEST_CASE("Frostman certificates of injected densities") {
    const auto g = GridSpec::box_cells(1, 2.5, 4000);
    const auto V = PotentialSpec::quadratic(1, 0.5);
    const auto k = KernelSpec::logarithmic(1);
    const auto exact = evaluate_measure(semicircle_cells(g, 2.0), g, V, k);
    CHECK(exact.residuals.max_negative_violation <= 5e-3);
    CHECK(exact.residuals.max_on_support <= 5e-3);
    std::vector<double> flat(g.cell_count(), 0.0);
    double mass = 0.0;
    for (int i = 0; i < g.n[0]; ++i)
        if (std::abs(g.center(0, i)) < 2.0) {
            flat[i] = 1.0;
            mass += g.h;
        }
    for (double& v : flat) v /= mass;
    const auto wrong = evaluate_measure(flat, g, V, k);
    CHECK(wrong.residuals.max_on_support > 0.05);
    // the solver does at least as well as the exact law on the same grid
    const auto& mu = semicircle_solution();
    const auto g2 = mu.grid;
    const double e_exact = mean_field_energy(semicircle_cells(g2, 2.0), g2, V, k);
    CHECK(mu.energy_I <= e_exact + 1e-12);
    auto perturbed = mu.density;
    for (std::size_t i = 0; i + 1 < perturbed.size(); i += 2) {
        const double d = 0.1 * std::min(perturbed[i], perturbed[i + 1]);
        perturbed[i] += d;
        perturbed[i + 1] -= d;
    }
    CHECK(mu.energy_I <= mean_field_energy(perturbed, g2, V, k) + 1e-12);
}

TEST_CASE("refinement stability") {
    const auto V = PotentialSpec::quadratic(1, 0.5);
    const auto k = KernelSpec::logarithmic(1);
    const auto a = solve_equilibrium(V, k, GridSpec::box_cells(1, 2.5, 250));
    const auto b = solve_equilibrium(V, k, GridSpec::box_cells(1, 2.5, 500));
    CHECK(std::abs(a.energy_I - b.energy_I) <= a.grid.h);
}

TEST_CASE("potential of a measure") {
    // unit mass in one cell seen from far away
    GridSpec g;
    g.d = 1;
    g.lower = {-0.005};
    g.h = 0.01;
    g.n = {1};
    auto point = evaluate_measure({100.0}, g, flat_potential(-1, 1), KernelSpec::logarithmic(1));
    for (double x : {0.5, 2.0, 10.0}) {
        const double xs[1] = {x};
        CHECK(std::abs(potential_of_measure(point, xs) + std::log(x)) < g.h * g.h / (x * x));
    }
    // uniform law on [0,1] at x = 2
    GridSpec u;
    u.d = 1;
    u.lower = {0.0};
    u.h = 0.01;
    u.n = {100};
    auto unif = evaluate_measure(std::vector<double>(100, 1.0), u, flat_potential(-1, 3), KernelSpec::logarithmic(1));
    const double two[1] = {2.0};
    CHECK(potential_of_measure(unif, two) == doctest::Approx(1.0 - 2.0 * std::log(2.0)).epsilon(1e-12));
    // inside the semicircle H(0) = c - V(0)/2 = c
    const auto& mu = semicircle_solution();
    const double zero[1] = {0.0};
    CHECK(std::abs(potential_of_measure(mu, zero) - mu.frostman_c) < 1e-4);
}

TEST_CASE("zeta values") {
    const auto& mu = semicircle_solution();
    const auto V = PotentialSpec::quadratic(1, 0.5);
    const double tol = 5e-3;
    for (double x : {0.0, -2.0, 2.0, 1.3}) {
        const double xs[1] = {x};
        CHECK(std::abs(zeta_value(mu, V, xs)) <= tol);
    }
    const double three[1] = {3.0};
    CHECK(zeta_value(mu, V, three) > 0.1);
    // x = 3 is outside the grid; it agrees with the closed form of zeta there
    const double z3 = 3.0 * std::sqrt(5.0) / 4.0 - std::log((3.0 + std::sqrt(5.0)) / 2.0);
    CHECK(zeta_value(mu, V, three) == doctest::Approx(z3).epsilon(1e-3));
    for (int i : {17, 500, 1000, 1800}) {
        const double xs[1] = {mu.grid.center(0, i)};
        CHECK(zeta_value(mu, V, xs) == doctest::Approx(mu.zeta[i]).epsilon(1e-12));
    }
}

TEST_CASE("two-dimensional disk") {
    const auto V = PotentialSpec::quadratic(2, 1.0);
    const auto k = KernelSpec::logarithmic(2);
    const auto mu = solve_equilibrium(V, k, GridSpec::box_cells(2, 1.25, 80));
    CHECK(std::abs(mu.mass() - 1.0) < 1e-8);
    CHECK(mu.residuals.max_on_support <= 5e-3);
    CHECK(mu.residuals.max_negative_violation <= 5e-3);
    double c[2];
    double lo = 1e9, hi = 0.0, rmax = 0.0;
    for (std::size_t i = 0; i < mu.grid.cell_count(); ++i) {
        mu.grid.center(i, c);
        const double r = std::hypot(c[0], c[1]);
        if (mu.support_mask[i]) rmax = std::max(rmax, r);
        if (r < 0.85) {
            lo = std::min(lo, mu.density[i]);
            hi = std::max(hi, mu.density[i]);
        }
    }
    CHECK(hi / lo - 1.0 < 0.02);
    CHECK(hi == doctest::Approx(1.0 / pi).epsilon(0.02));
    CHECK(std::abs(rmax - 1.0) < 2 * mu.grid.h);
    CHECK(std::abs(mu.sigma_volume - pi) < 0.05 * pi);
}

TEST_CASE("solver errors") {
    const auto V = PotentialSpec::quadratic(1, 0.5);
    const auto k = KernelSpec::logarithmic(1);
    try {
        solve_equilibrium(V, k, GridSpec::box_cells(1, 1.5, 200));
        FAIL("expected a boundary error");
    } catch (const ConvergenceError& e) {
        CHECK(std::string(e.what()).find("enlarge grid") != std::string::npos);
    }
    SolverOpts opts;
    opts.tolerance = 1e-300;
    try {
        solve_equilibrium(V, k, GridSpec::box_cells(1, 2.5, 200), opts);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() >= 0.0);
    }
}
