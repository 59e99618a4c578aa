#include "rgl/reference.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "rgl/errors.hpp"

namespace rgl {

Window::Window(std::vector<double> c, std::vector<double> s) : center(std::move(c)), side(std::move(s)) {
    if (center.empty() || center.size() != side.size()) throw ParameterError("window needs matching center and side");
    for (double x : side)
        if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("window side lengths must be positive");
}

Window Window::cube(int d, double R) {
    return Window(std::vector<double>(d, 0.0), std::vector<double>(d, 2.0 * R));
}

double Window::volume() const {
    double v = 1.0;
    for (double x : side) v *= x;
    return v;
}

bool Window::contains(std::span<const double> x) const {
    for (int k = 0; k < d(); ++k)
        if (x[k] < lower(k) || x[k] >= upper(k)) return false;
    return true;
}

Configuration sample_poisson(double intensity, const Window& w, std::uint64_t seed) {
    if (!(intensity > 0.0) || !std::isfinite(intensity)) throw ParameterError("Poisson intensity must be positive");
    std::mt19937_64 rng(seed);
    std::poisson_distribution<long long> count(intensity * w.volume());
    const long long n = count(rng);
    Configuration c(w.d(), Scale::Micro);
    c.coords.reserve(static_cast<std::size_t>(n) * w.d());
    for (long long i = 0; i < n; ++i)
        for (int k = 0; k < w.d(); ++k)
            c.coords.push_back(w.lower(k) + w.side[k] * std::generate_canonical<double, 53>(rng));
    return c;
}

Configuration sample_beta_hermite(int N, double beta, std::uint64_t seed, double a) {
    if (N < 2) throw ParameterError("beta-Hermite sampler needs N >= 2");
    if (!(beta > 0.0)) throw ParameterError("inverse temperature must be positive");
    if (!(a > 0.0)) throw ParameterError("potential strength must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd diag(N), sub(N - 1);
    // (1/sqrt 2) times the matrix with N(0, 2) diagonal and chi_{(N-k) beta}
    // off-diagonal entries
    for (int i = 0; i < N; ++i) diag[i] = gauss(rng);
    for (int k = 1; k < N; ++k) {
        std::gamma_distribution<double> g(0.5 * (N - k) * beta, 2.0);
        sub[k - 1] = std::sqrt(g(rng) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("tridiagonal eigensolver failed", 0.0);
    // eigenvalue density is prod |dl|^beta exp(-sum l^2 / 2)
    const double scale = 1.0 / std::sqrt(beta * N * a);
    Configuration c(1, Scale::Macro);
    c.coords.resize(N);
    for (int i = 0; i < N; ++i) c.coords[i] = scale * es.eigenvalues()[i];
    return c;
}

Configuration sample_ginibre(int N, std::uint64_t seed) {
    if (N < 2) throw ParameterError("Ginibre sampler needs N >= 2");
    if (N > kGinibreMaxN) throw ParameterError("Ginibre sampler is capped at N = 1024");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(2.0 * N));
    Eigen::MatrixXcd A(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const double re = gauss(rng);
            A(i, j) = {re, gauss(rng)};
        }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("complex eigensolver failed", 0.0);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + N);
    // fixed order so the output does not depend on solver internals
    std::sort(ev.begin(), ev.end(), [](auto x, auto y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    Configuration c(2, Scale::Macro);
    c.coords.reserve(2 * N);
    for (auto z : ev) {
        c.coords.push_back(z.real());
        c.coords.push_back(z.imag());
    }
    return c;
}

LatticeKind lattice_kind_from_string(const std::string& s) {
    if (s == "Z_1D") return LatticeKind::Z_1D;
    if (s == "SQUARE_2D") return LatticeKind::SQUARE_2D;
    if (s == "TRIANGULAR_2D") return LatticeKind::TRIANGULAR_2D;
    throw ParameterError("unknown lattice kind '" + s + "'");
}

std::string to_string(LatticeKind k) {
    switch (k) {
        case LatticeKind::Z_1D: return "Z_1D";
        case LatticeKind::SQUARE_2D: return "SQUARE_2D";
        case LatticeKind::TRIANGULAR_2D: return "TRIANGULAR_2D";
    }
    return "";
}

Configuration lattice_config(LatticeKind kind, double m, const Window& w) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("lattice density must be positive");
    const int d = kind == LatticeKind::Z_1D ? 1 : 2;
    if (w.d() != d) throw ParameterError("window dimension does not match the lattice");
    Configuration c(d, Scale::Micro);
    if (kind == LatticeKind::Z_1D) {
        const double a = 1.0 / m;
        const auto k0 = static_cast<long long>(std::floor(w.lower(0) / a - 0.5)) - 1;
        const auto k1 = static_cast<long long>(std::ceil(w.upper(0) / a - 0.5)) + 1;
        for (long long k = k0; k <= k1; ++k) {
            const double x[1] = {(k + 0.5) * a};
            if (w.contains(x)) c.push_back(x);
        }
        return c;
    }
    // basis vectors v1, v2 of a cell of area 1/m
    double v1[2], v2[2];
    if (kind == LatticeKind::SQUARE_2D) {
        const double a = 1.0 / std::sqrt(m);
        v1[0] = a, v1[1] = 0.0, v2[0] = 0.0, v2[1] = a;
    } else {
        const double a = std::sqrt(2.0 / (std::sqrt(3.0) * m));
        v1[0] = a, v1[1] = 0.0, v2[0] = 0.5 * a, v2[1] = 0.5 * std::sqrt(3.0) * a;
    }
    // j ranges over rows by the y extent, i by the x extent shifted per row
    const auto j0 = static_cast<long long>(std::floor(w.lower(1) / v2[1] - 0.5)) - 1;
    const auto j1 = static_cast<long long>(std::ceil(w.upper(1) / v2[1] - 0.5)) + 1;
    for (long long j = j0; j <= j1; ++j) {
        const double y = (j + 0.5) * v2[1];
        const double shift = (j + 0.5) * v2[0];
        const auto i0 = static_cast<long long>(std::floor((w.lower(0) - shift) / v1[0] - 0.5)) - 1;
        const auto i1 = static_cast<long long>(std::ceil((w.upper(0) - shift) / v1[0] - 0.5)) + 1;
        for (long long i = i0; i <= i1; ++i) {
            const double x[2] = {(i + 0.5) * v1[0] + shift, y};
            if (w.contains(x)) c.push_back(x);
        }
    }
    return c;
}

Configuration quantile_config(const EquilibriumMeasure& mu, int N) {
    if (mu.grid.d != 1) throw ParameterError("quantile configuration needs a 1D measure");
    if (N < 1) throw ParameterError("quantile configuration needs N >= 1");
    const auto& rho = mu.density;
    const double h = mu.grid.h;
    std::vector<double> cdf(rho.size() + 1, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) cdf[i + 1] = cdf[i] + std::max(0.0, rho[i]) * h;
    const double total = cdf.back();
    if (!(total > 0.0)) throw InputError("measure has no mass");
    Configuration c(1, Scale::Macro);
    c.coords.resize(N);
    std::size_t cell = 0;
    for (int i = 0; i < N; ++i) {
        const double q = (i + 0.5) / N * total;
        while (cell + 1 < rho.size() && cdf[cell + 1] <= q) ++cell;
        while (cell + 1 < rho.size() && rho[cell] <= 0.0) ++cell;
        const double frac = rho[cell] > 0.0 ? (q - cdf[cell]) / (rho[cell] * h) : 0.5;
        c.coords[i] = mu.grid.lower[0] + (cell + std::clamp(frac, 0.0, 1.0)) * h;
    }
    return c;
}

double beta_hermite_log_partition(int N, double beta, double a) {
    if (N < 1) throw ParameterError("N must be positive");
    if (!(beta > 0.0) || !(a > 0.0)) throw ParameterError("beta and a must be positive");
    const double c = 0.5 * beta * N * a;  // weight exp(-c sum x^2)
    double s = -(0.5 * N + 0.25 * beta * N * (N - 1.0)) * std::log(2.0 * c) +
               0.5 * N * std::log(2.0 * std::numbers::pi);
    for (int j = 1; j <= N; ++j) s += std::lgamma(1.0 + 0.5 * j * beta) - std::lgamma(1.0 + 0.5 * beta);
    return s;
}

}  // namespace rgl
