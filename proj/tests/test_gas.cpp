#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "rgl/errors.hpp"
#include "rgl/gas.hpp"

using namespace rgl;

namespace {

std::shared_ptr<const EquilibriumMeasure> semicircle(int cells) {
    return std::make_shared<const EquilibriumMeasure>(solve_equilibrium(
        PotentialSpec::quadratic(1, 1.0), KernelSpec::logarithmic(1), GridSpec::box_cells(1, 2.0, cells)));
}

GasModel log_model(int N, double beta = 2.0) {
    return GasModel(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 1.0), nullptr, N, beta);
}

double naive_h(const Configuration& c, const GasModel& m) {
    double h = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (i == j) continue;
            double r2 = 0.0;
            for (int k = 0; k < c.d; ++k) r2 += std::pow(c.coords[i * c.d + k] - c.coords[j * c.d + k], 2);
            h += kernel_value(m.kernel, std::sqrt(r2));
        }
        h += m.N * m.V(c.point(i));
    }
    return h;
}

// i.i.d. draws from a semicircle of radius R by inverse transform sampling
Configuration semicircle_draw(int N, double R, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Configuration c(1, Scale::Macro);
    for (int i = 0; i < N; ++i) {
        double x;
        do {
            x = R * (2 * u(rng) - 1);
        } while (u(rng) > std::sqrt(std::max(0.0, 1 - x * x / (R * R))));
        c.coords.push_back(x);
    }
    return c;
}

}  // namespace

TEST_CASE("hamiltonian") {
    const auto m1 = log_model(1);
    CHECK(hamiltonian(Configuration(1, Scale::Macro, {0.7}), m1) == doctest::Approx(0.49));
    const auto m2 = log_model(2);
    CHECK(hamiltonian(Configuration(1, Scale::Macro, {-1.0, 1.0}), m2) ==
          doctest::Approx(4.0 - 2.0 * std::log(2.0)).epsilon(1e-15));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    const GasModel m3(KernelSpec::riesz(2, 1.0), PotentialSpec::quadratic(2, 0.3), nullptr, 3, 1.0);
    for (int t = 0; t < 10; ++t) {
        Configuration c(2, Scale::Macro);
        for (int i = 0; i < 6; ++i) c.coords.push_back(n01(rng));
        CHECK(hamiltonian(c, m3) == doctest::Approx(naive_h(c, m3)).epsilon(1e-12));
    }
    CHECK(std::isinf(hamiltonian(Configuration(1, Scale::Macro, {0.5, 0.5}), m2)));
    CHECK_THROWS_AS(hamiltonian(Configuration(1, Scale::Macro, {0.5}), m2), InputError);
}

TEST_CASE("gibbs log density") {
    const auto m = log_model(3);
    const Configuration c(1, Scale::Macro, {-0.3, 0.1, 0.9});
    CHECK(gibbs_log_density(c, m) == doctest::Approx(-hamiltonian(c, m)).epsilon(1e-15));
    const Configuration p(1, Scale::Macro, {0.9, -0.3, 0.1});
    CHECK(gibbs_log_density(p, m) == doctest::Approx(gibbs_log_density(c, m)).epsilon(1e-15));
    const GasModel r(KernelSpec::riesz(2, 1.0), PotentialSpec::quadratic(2, 1.0), nullptr, 4, 1.0);
    const Configuration c2(2, Scale::Macro, {0, 0, 1, 0, 0, 1, 1, 1});
    CHECK(gibbs_log_density(c2, r) == doctest::Approx(-hamiltonian(c2, r) / 4.0).epsilon(1e-15));
}

TEST_CASE("delta hamiltonian") {
    const auto m = log_model(2);
    const Configuration c(1, Scale::Macro, {0.0, 1.0});
    const double same[1] = {1.0};
    CHECK(delta_hamiltonian(c, 1, same, m) == 0.0);
    const GasModel flat(KernelSpec::logarithmic(1), PotentialSpec::tabulated(1, {-5.0}, 10.0, {2}, {0.0, 0.0}),
                        nullptr, 2, 2.0);
    const double two[1] = {2.0};
    CHECK(delta_hamiltonian(c, 1, two, flat) == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-15));
    const double onto[1] = {0.0};
    CHECK(std::isinf(delta_hamiltonian(c, 1, onto, m)));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    const auto m16 = log_model(16);
    Configuration big(1, Scale::Macro);
    for (int i = 0; i < 16; ++i) big.coords.push_back(n01(rng));
    for (int t = 0; t < 20; ++t) {
        const std::size_t i = t % 16;
        const double x[1] = {n01(rng)};
        Configuration moved = big;
        moved.coords[i] = x[0];
        const double full = hamiltonian(moved, m16) - hamiltonian(big, m16);
        CHECK(delta_hamiltonian(big, i, x, m16) ==
              doctest::Approx(full).epsilon(1e-9 * std::max(1.0, std::abs(hamiltonian(big, m16)) / std::abs(full))));
    }
}

TEST_CASE("splitting") {
    const auto mu = semicircle(1000);
    const GasModel m1(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 1.0), mu, 1, 2.0);
    const auto e1 = splitting_breakdown(Configuration(1, Scale::Macro, {0.0}), m1);
    CHECK(e1.W_N == doctest::Approx(-mu->energy_I).epsilon(1e-6));
    CHECK(mu->energy_I == doctest::Approx(0.75 + 0.5 * std::log(2.0)).epsilon(1e-5));

    std::mt19937_64 rng(3);
    for (int N : {2, 8, 32}) {
        const GasModel m(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 1.0), mu, N, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto c = semicircle_draw(N, std::sqrt(2.0), rng);
            const auto e = splitting_breakdown(c, m);
            const double closure = e.leading + e.log_correction + e.zeta_term + N * e.W_N - e.H_N;
            worst = std::max(worst, std::abs(closure) / std::max(1.0, std::abs(e.H_N)));
        }
        CHECK(worst <= 1e-9);
    }

    // refinement of the equilibrium grid
    const auto fine = semicircle(2000);
    const GasModel coarse_model(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 1.0), mu, 8, 2.0);
    const GasModel fine_model(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 1.0), fine, 8, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto c = semicircle_draw(8, std::sqrt(2.0), rng);
        worst = std::max(worst, std::abs(splitting_breakdown(c, coarse_model).W_N -
                                         splitting_breakdown(c, fine_model).W_N));
    }
    MESSAGE("max W_N refinement change " << worst);
    CHECK(worst <= 1e-3);

    CHECK_THROWS_AS(splitting_breakdown(Configuration(1, Scale::Macro, {0.0, 9.0}), GasModel(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 1.0), mu, 2, 2.0)),
                    InputError);
    CHECK_THROWS_AS(GasModel(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, 0.5), mu, 2, 2.0), ParameterError);
}
