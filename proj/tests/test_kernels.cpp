#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cell_operator.hpp"
#include "rgl/errors.hpp"
#include "rgl/kernels.hpp"

using namespace rgl;

TEST_CASE("kernel values") {
    const auto log1 = KernelSpec::logarithmic(1);
    CHECK(kernel_value(log1, 1.0) == 0.0);
    CHECK(kernel_value(log1, 2.0) == doctest::Approx(-0.693147180559945).epsilon(1e-14));
    CHECK(kernel_value(KernelSpec::riesz(2, 1.0), 0.5) == doctest::Approx(2.0));
    CHECK_THROWS_AS(kernel_value(log1, 0.0), DomainError);
    CHECK_THROWS_AS(kernel_value(log1, -1.0), DomainError);
}

TEST_CASE("truncation") {
    const auto log1 = KernelSpec::logarithmic(1);
    auto t = truncated_kernel(log1, 0.1, 0.2);
    CHECK(t.g_eta == doctest::Approx(-std::log(0.2)));
    CHECK(t.f_eta == 0.0);
    t = truncated_kernel(log1, 0.1, 0.05);
    CHECK(t.f_eta == doctest::Approx(std::log(2.0)));
    t = truncated_kernel(KernelSpec::riesz(2, 1.0), 0.5, 0.25);
    CHECK(t.g_eta == doctest::Approx(2.0));
    CHECK(t.f_eta == doctest::Approx(2.0));
    CHECK_THROWS_AS(truncated_kernel(log1, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(truncated_kernel(log1, 1.0, 1.0), ParameterError);

    for (double r : {0.01, 0.07, 0.3, 0.9, 3.0}) {
        const auto a = truncated_kernel(log1, 0.2, r);
        const auto b = truncated_kernel(log1, 0.05, r);
        CHECK(a.g_eta <= b.g_eta);
        CHECK(a.g_eta + a.f_eta == doctest::Approx(kernel_value(log1, r)).epsilon(1e-15));
        if (r >= 0.2) CHECK(a.f_eta == 0.0);
    }
}

TEST_CASE("c_{d,s}") {
    constexpr double pi = std::numbers::pi;
    CHECK(cds_constant(1, Exponent::logarithmic()) == doctest::Approx(2 * pi));
    CHECK(cds_constant(2, Exponent::logarithmic()) == doctest::Approx(2 * pi));
    CHECK(cds_constant(3, Exponent::riesz(1.0)) == doctest::Approx(4 * pi).epsilon(1e-14));
    CHECK_THROWS_AS(cds_constant(3, Exponent::logarithmic()), ParameterError);
    CHECK_THROWS_AS(cds_constant(2, Exponent::riesz(2.0)), ParameterError);
    CHECK_THROWS_AS(cds_constant(3, Exponent::riesz(0.5)), ParameterError);
    CHECK_THROWS_AS(cds_constant(1, Exponent::riesz(0.0)), ParameterError);
    // d = 1, s in (0,1): 2s * 2 sqrt(pi) Gamma((s+1)/2) / Gamma((s+2)/2)
    const double s = 0.5;
    CHECK(cds_constant(1, Exponent::riesz(s)) ==
          doctest::Approx(2 * s * 2 * std::sqrt(pi) * std::tgamma(0.75) / std::tgamma(1.25)));
    CHECK(KernelSpec::riesz(3, 1.0).cds == doctest::Approx(4 * pi));
}

TEST_CASE("homogeneity") {
    const auto r = KernelSpec::riesz(2, 0.7);
    const auto l = KernelSpec::logarithmic(2);
    for (double lam : {0.1, 1.7, 13.0})
        for (double x : {0.3, 2.2}) {
            CHECK(kernel_value(r, lam * x) == doctest::Approx(std::pow(lam, -0.7) * kernel_value(r, x)).epsilon(1e-14));
            CHECK(kernel_value(l, lam * x) == doctest::Approx(kernel_value(l, x) - std::log(lam)).epsilon(1e-14));
        }
}

TEST_CASE("scale configuration") {
    Configuration c(1, Scale::Macro, {1.0, 2.0});
    CHECK(scale_configuration(c, 1.0) == c);
    CHECK(scale_configuration(c, 4.0).coords == std::vector<double>{4.0, 8.0});
    Configuration c2(2, Scale::Micro, {1.0, 0.0});
    const auto s2 = scale_configuration(c2, 4.0);
    CHECK(s2.coords[0] == doctest::Approx(2.0));
    CHECK(s2.coords[1] == 0.0);
    CHECK(s2.scale == Scale::Micro);
    const auto back = scale_configuration(scale_configuration(c2, 3.3), 1 / 3.3);
    CHECK(back.coords[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(scale_configuration(c, 0.0), ParameterError);
    CHECK_THROWS_AS(Configuration(2, Scale::Macro, {1.0, 2.0, 3.0}), InputError);
}

TEST_CASE("close pair energy") {
    const auto log1 = KernelSpec::logarithmic(1);
    CHECK(close_pair_energy(Configuration(1, Scale::Macro, {0.0, 1.0, 2.5}), log1, 0.2) == 0.0);
    CHECK(close_pair_energy(Configuration(1, Scale::Macro, {0.0, 0.1}), log1, 0.1) ==
          doctest::Approx(4.60517018598809));
    const auto r1 = KernelSpec::riesz(1, 0.5);
    CHECK(close_pair_energy(Configuration(2, Scale::Macro, {0.0, 0.0, 0.2, 0.0, 10.0, 0.0}), KernelSpec::riesz(2, 1.0),
                            0.2) == doctest::Approx(10.0));
    CHECK(std::isinf(close_pair_energy(Configuration(1, Scale::Macro, {0.3, 0.3}), r1, 0.1)));
    CHECK_THROWS_AS(close_pair_energy(Configuration(1, Scale::Macro, {0.0}), log1, 0.5), ParameterError);

    // permutation invariance and additivity over separated clusters
    Configuration a(1, Scale::Macro, {0.0, 0.05, 0.12});
    Configuration b(1, Scale::Macro, {50.0, 50.03});
    Configuration ab(1, Scale::Macro, {50.03, 0.12, 0.0, 50.0, 0.05});
    CHECK(close_pair_energy(ab, log1, 0.1) ==
          doctest::Approx(close_pair_energy(a, log1, 0.1) + close_pair_energy(b, log1, 0.1)).epsilon(1e-14));
}

TEST_CASE("unit cell averages") {
    const auto log1 = KernelSpec::logarithmic(1);
    const int zero = 0;
    // mean of -log|x-y| over the unit square
    CHECK(detail::unit_cell_pair(log1, std::span<const int>(&zero, 1)) == doctest::Approx(1.5).epsilon(1e-15));
    // the series and the closed form agree across the switch
    for (int o : {19, 20, 21, 22}) {
        const double exact = -std::log(o) - 0.5 * ((1 + 1.0 / o) * (1 + 1.0 / o) * std::log1p(1.0 / o) +
                                                  (1 - 1.0 / o) * (1 - 1.0 / o) * std::log1p(-1.0 / o)) *
                                                     o * o +
                             1.5;
        CHECK(detail::unit_cell_pair(log1, std::span<const int>(&o, 1)) == doctest::Approx(exact).epsilon(1e-11));
    }
    const double u = 2.0;
    // mean of -log|2 - y| over y in [-1/2, 1/2]
    const double expect = -(2.5 * std::log(2.5) - 2.5 - (1.5 * std::log(1.5) - 1.5));
    CHECK(detail::unit_point_cell(log1, std::span<const double>(&u, 1)) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("two-dimensional cell averages") {
    // oracle values from adaptive quadrature of the tent-weighted integrals
    const int o[2] = {0, 0};
    CHECK(detail::unit_cell_pair(KernelSpec::logarithmic(2), std::span<const int>(o, 2)) ==
          doctest::Approx(0.8050867219500869).epsilon(1e-9));
    CHECK(detail::unit_cell_pair(KernelSpec::riesz(2, 0.5), std::span<const int>(o, 2)) ==
          doctest::Approx(1.5844091715698887).epsilon(1e-8));
}
