#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rgl/errors.hpp"
#include "rgl/fields.hpp"
#include "rgl/reference.hpp"
#include "rgl/sampler.hpp"

using namespace rgl;

TEST_CASE("poisson process") {
    CHECK(sample_poisson(1.0, Window({0.0}, {1e-12}), 1).size() == 0);
    const Window w({0.0}, {100.0});
    double s = 0.0, s2 = 0.0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        const auto c = sample_poisson(1.0, w, derive_seed(7, t + 1));
        const double n = static_cast<double>(c.size());
        s += n;
        s2 += n * n;
        for (double x : c.coords) REQUIRE((x >= -50.0 && x < 50.0));
    }
    const double mean = s / draws, var = s2 / draws - mean * mean;
    CHECK(std::abs(mean - 100.0) <= 3.0 * std::sqrt(100.0 / draws));
    CHECK(var / mean >= 0.95);
    CHECK(var / mean <= 1.05);
    CHECK(sample_poisson(2.0, Window::cube(2, 3.0), 5).coords == sample_poisson(2.0, Window::cube(2, 3.0), 5).coords);
    CHECK_THROWS_AS(sample_poisson(0.0, w, 1), ParameterError);
    CHECK_THROWS_AS(Window({0.0}, {-1.0}), ParameterError);
}

TEST_CASE("tridiagonal beta-Hermite at N = 2") {
    const std::size_t n = 200000;
    std::vector<double> gaps;
    gaps.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto c = sample_beta_hermite(2, 2.0, derive_seed(3, t + 1));
        gaps.push_back(std::abs(c.coords[1] - c.coords[0]));
    }
    const auto ref = oracle::two_point_gaps(n, 99);
    const double ks = ks_two_sample(gaps, ref);
    MESSAGE("gap KS against rejection sampler " << ks);
    CHECK(ks < 0.01);
    // gap density proportional to v^2 exp(-v^2): distribution P(3/2, v^2)
    std::sort(gaps.begin(), gaps.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < gaps.size(); i += 97)
        worst = std::max(worst, std::abs(boost::math::gamma_p(1.5, gaps[i] * gaps[i]) - (i + 0.5) / gaps.size()));
    CHECK(worst < 0.005);
}

TEST_CASE("tridiagonal beta-Hermite large N") {
    double top = 0.0;
    const int draws = 40;
    for (int t = 0; t < draws; ++t) {
        const auto c = sample_beta_hermite(256, 2.0, derive_seed(11, t + 1), 0.5);
        top += *std::max_element(c.coords.begin(), c.coords.end());
    }
    top /= draws;
    MESSAGE("mean top eigenvalue " << top);
    CHECK(top >= 1.85);
    CHECK(top <= 2.0);
    const auto c = sample_beta_hermite(512, 2.0, 5, 0.5);
    CHECK(wasserstein1_to_cdf(c.coords, [](double x) { return oracle::semicircle_cdf(x, 2.0); }, -2.0, 2.0) < 0.03);
    // strength 1 contracts the support to radius sqrt(2)
    const auto u = sample_beta_hermite(512, 4.0, 6);
    CHECK(wasserstein1_to_cdf(u.coords, [](double x) { return oracle::semicircle_cdf(x, std::sqrt(2.0)); },
                              -std::sqrt(2.0), std::sqrt(2.0)) < 0.03);
    CHECK(sample_beta_hermite(64, 1.0, 9).coords == sample_beta_hermite(64, 1.0, 9).coords);
    CHECK_THROWS_AS(sample_beta_hermite(1, 2.0, 1), ParameterError);
}

TEST_CASE("ginibre") {
    std::vector<Configuration> samples;
    for (int t = 0; t < 100; ++t) samples.push_back(sample_ginibre(256, derive_seed(21, t + 1)));
    const double p = chi2_uniform_pvalue(angular_counts(samples, 16));
    MESSAGE("angular chi2 p " << p);
    CHECK(p > 0.01);
    std::size_t outside = 0, total = 0;
    for (const auto& c : samples)
        for (std::size_t i = 0; i < c.size(); ++i, ++total) outside += std::hypot(c.coords[2 * i], c.coords[2 * i + 1]) > 1.1;
    CHECK(static_cast<double>(outside) / total < 0.02);
    std::vector<double> edges;
    // equal-area annuli inside 0.8 of the edge
    for (int k = 0; k <= 8; ++k) edges.push_back(0.8 * std::sqrt(k / 8.0));
    const auto rho = radial_density(samples, edges);
    for (double r : rho) CHECK(std::abs(r / (256.0 / std::numbers::pi) - 1.0) < 0.05);
    CHECK(sample_ginibre(8, 3).coords == sample_ginibre(8, 3).coords);
    CHECK_THROWS_AS(sample_ginibre(1025, 1), ParameterError);
}

TEST_CASE("lattices") {
    const auto z = lattice_config(LatticeKind::Z_1D, 1.0, Window({5.0}, {10.0}));
    REQUIRE(z.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(z.coords[i] == doctest::Approx(i + 0.5).epsilon(1e-15));
    const auto sq = lattice_config(LatticeKind::SQUARE_2D, 4.0, Window::cube(2, 2.0));
    CHECK(sq.size() == 64);
    const auto tri = lattice_config(LatticeKind::TRIANGULAR_2D, 1.0, Window::cube(2, 10.0));
    double nn = 1e9, nn_sq = 1e9;
    for (std::size_t i = 0; i < tri.size(); ++i)
        for (std::size_t j = i + 1; j < tri.size(); ++j)
            nn = std::min(nn, std::sqrt(squared_distance(&tri.coords[2 * i], &tri.coords[2 * j], 2)));
    for (std::size_t i = 0; i < sq.size(); ++i)
        for (std::size_t j = i + 1; j < sq.size(); ++j)
            nn_sq = std::min(nn_sq, std::sqrt(squared_distance(&sq.coords[2 * i], &sq.coords[2 * j], 2)));
    CHECK(nn == doctest::Approx(std::sqrt(2.0 / std::sqrt(3.0))).epsilon(1e-12));
    CHECK(nn == doctest::Approx(1.0746).epsilon(1e-4));
    CHECK(nn_sq == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(static_cast<double>(tri.size()) - 400.0) < 0.1 * 400.0);
    CHECK_THROWS_AS(lattice_config(LatticeKind::Z_1D, 1.0, Window::cube(2, 1.0)), ParameterError);
    CHECK(lattice_kind_from_string(to_string(LatticeKind::TRIANGULAR_2D)) == LatticeKind::TRIANGULAR_2D);
}

TEST_CASE("quantile configurations") {
    const GridSpec g{1, {0.0}, 0.01, {100}};
    const auto uni = evaluate_measure(std::vector<double>(100, 1.0), g, PotentialSpec::quadratic(1, 1.0),
                                      KernelSpec::logarithmic(1));
    const auto q = quantile_config(uni, 4);
    const double want[4] = {0.125, 0.375, 0.625, 0.875};
    for (int i = 0; i < 4; ++i) CHECK(q.coords[i] == doctest::Approx(want[i]).epsilon(1e-12));

    const auto semi = solve_equilibrium(PotentialSpec::quadratic(1, 0.5), KernelSpec::logarithmic(1),
                                        GridSpec::box_cells(1, 2.5, 1000));
    const auto odd = quantile_config(semi, 65);
    CHECK(std::abs(odd.coords[32]) < 1e-9);
    for (int i = 1; i < 65; ++i) CHECK(odd.coords[i] > odd.coords[i - 1]);
    CHECK(odd.coords[64] < 2.0);
}

TEST_CASE("beta-Hermite partition function") {
    CHECK(beta_hermite_log_partition(1, 2.0) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
    CHECK(beta_hermite_log_partition(5, 1.3, 0.7) == doctest::Approx(oracle::hermite_log_z(5, 1.3, 0.7)).epsilon(1e-14));
}
