#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "oracles.hpp"
#include "rgl/errors.hpp"
#include "rgl/sampler.hpp"

using namespace rgl;

namespace {

using oracle::hermite_log_z;

GasModel log_gas(int N, double beta, double a = 1.0) {
    return GasModel(KernelSpec::logarithmic(1), PotentialSpec::quadratic(1, a), nullptr, N, beta);
}

}  // namespace

TEST_CASE("generator state round trip") {
    Rng a(42);
    for (int i = 0; i < 7; ++i) a.normal();
    Rng b(0);
    b.restore(a.state());
    for (int i = 0; i < 5; ++i) CHECK(a.normal() == b.normal());
    CHECK(a.uniform() == b.uniform());
    CHECK(derive_seed(17, 0) == 17);
    CHECK(derive_seed(17, 1) != derive_seed(17, 2));
}

TEST_CASE("near-zero beta accepts almost everything") {
    const auto m = log_gas(16, 1e-9);
    ChainState s = init_chain(m, 3);
    for (int t = 0; t < 100; ++t) metropolis_sweep(s, m);
    CHECK(static_cast<double>(s.accepted) / static_cast<double>(s.proposed) >= 0.99);
    CHECK(s.accepted <= s.proposed);
}

TEST_CASE("cached energy stays in sync") {
    const GasModel m(KernelSpec::riesz(2, 1.0), PotentialSpec::quadratic(2, 1.0), nullptr, 20, 2.0);
    ChainState s = init_chain(m, 9);
    for (int t = 0; t < 999; ++t) metropolis_sweep(s, m, t < 200);
    const double h = hamiltonian(s.config, m);
    CHECK(std::abs(s.hamiltonian(m) - h) <= 1e-6 * std::abs(h));
    const auto ml = log_gas(30, 2.0);
    ChainState t = init_chain(ml, 4);
    for (int k = 0; k < 999; ++k) metropolis_sweep(t, ml, k < 200);
    const double hl = hamiltonian(t.config, ml);
    CHECK(std::abs(t.hamiltonian(ml) - hl) <= 1e-6 * std::abs(hl));
}

TEST_CASE("acceptance band and determinism") {
    const auto m = log_gas(64, 2.0);
    const auto a = run_chain(m, 500, 500, 50, 123);
    const auto b = run_chain(m, 500, 500, 50, 123);
    CHECK(a.diagnostics.acceptance_rate >= 0.15);
    CHECK(a.diagnostics.acceptance_rate <= 0.5);
    REQUIRE(a.configs.size() == 10);
    CHECK(a.configs == b.configs);
    CHECK(a.diagnostics.energy_trace == b.diagnostics.energy_trace);
    CHECK(a.sweep_indices.front() == 550);
    const auto none = run_chain(m, 10, 100, std::numeric_limits<std::uint64_t>::max(), 1);
    CHECK(none.configs.empty());
    CHECK(none.diagnostics.energy_trace.size() == 100);
}

TEST_CASE("interrupted chains resume exactly") {
    const auto m = log_gas(12, 2.0);
    ChainPlan plan{100, 300, 7, 1.0};
    ChainState full = init_chain(m, 5);
    SampleSet a;
    advance_chain(full, m, plan, a);
    ChainState part = init_chain(m, 5);
    SampleSet b;
    CHECK_FALSE(advance_chain(part, m, plan, b, 250));
    // restore through the serialized generator state as a checkpoint would
    ChainState copy = part;
    copy.rng = Rng(0);
    copy.rng.restore(part.rng.state());
    CHECK(advance_chain(copy, m, plan, b));
    CHECK(a.configs == b.configs);
    CHECK(a.diagnostics.energy_trace == b.diagnostics.energy_trace);
}

TEST_CASE("detailed balance of the acceptance rule") {
    // the Metropolis ratio forward times backward equals the Gibbs ratio
    const auto m = log_gas(2, 2.0);
    const Configuration c(1, Scale::Macro, {-0.4, 0.3});
    const double to[1] = {0.9};
    const double back[1] = {0.3};
    Configuration c2 = c;
    c2.coords[1] = 0.9;
    const double fwd = delta_hamiltonian(c, 1, to, m);
    const double bwd = delta_hamiltonian(c2, 1, back, m);
    const double f = m.gibbs_factor();
    const double af = std::min(1.0, std::exp(-f * fwd)), ab = std::min(1.0, std::exp(-f * bwd));
    CHECK(af / ab == doctest::Approx(std::exp(-f * (hamiltonian(c2, m) - hamiltonian(c, m)))).epsilon(1e-12));
}

TEST_CASE("parallel tempering") {
    const auto m = log_gas(10, 2.0);
    TemperingSchedule sched;
    sched.plan = {50, 200, 10, 1.0};
    const auto single = parallel_tempering({m}, sched, 77);
    const auto chain = run_chain(m, 50, 200, 10, 77);
    CHECK(single.rungs[0].configs == chain.configs);
    CHECK(single.rungs[0].diagnostics.energy_trace == chain.diagnostics.energy_trace);

    const auto same = parallel_tempering({m, m}, sched, 3);
    CHECK(same.swap_acceptance[0] == 1.0);
    CHECK_THROWS_AS(parallel_tempering({m.with_beta(3.0), m}, sched, 1), ParameterError);
    CHECK_THROWS_AS(parallel_tempering({m, log_gas(11, 2.0)}, sched, 1), ParameterError);

    // marginal of a rung agrees with a plain chain at the same beta
    TemperingSchedule long_sched;
    long_sched.plan = {2000, 40000, 0, 1.0};
    long_sched.workers = 2;
    const auto ladder = parallel_tempering({m.with_beta(1.0), m.with_beta(1.4), m}, long_sched, 8);
    const auto ref = run_chain(m, 2000, 40000, 0, 21);
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const auto& tr = ladder.rungs[2].diagnostics.energy_trace;
    const double se = std::hypot(batch_means_stderr(tr), batch_means_stderr(ref.diagnostics.energy_trace));
    CHECK(std::abs(mean(tr) - mean(ref.diagnostics.energy_trace)) <= 3 * se);
    for (double a : ladder.swap_acceptance) CHECK(a > 0.05);
}

TEST_CASE("exact small-N partition functions") {
    const auto m1 = log_gas(1, 2.0);
    CHECK(exact_logZ_small_N(m1, 64).log_z == doctest::Approx(0.572364942924700).epsilon(1e-10));
    const auto m2 = log_gas(2, 2.0);
    const double z2 = exact_logZ_small_N(m2, 64).log_z;
    CHECK(z2 == doctest::Approx(hermite_log_z(2, 2.0, 1.0)).epsilon(1e-9));
    CHECK(std::abs(exact_logZ_small_N(m2, 128).log_z - z2) < 1e-3);
    CHECK(std::abs(exact_logZ_small_N(log_gas(2, 2.0 * (1 + 1e-12)), 64).log_z - z2) < 1e-6);
    for (double beta : {0.7, 1.0, 4.0}) {
        const double err = exact_logZ_small_N(log_gas(2, beta), 64).log_z - hermite_log_z(2, beta, 1.0);
        MESSAGE("beta " << beta << " quadrature error " << err);
        CHECK(std::abs(err) < 1e-6);
    }
    // two-dimensional quadratic case against the Ginibre normalisation at beta = 2
    const GasModel g2(KernelSpec::logarithmic(2), PotentialSpec::quadratic(2, 1.0), nullptr, 2, 2.0);
    // Ginibre value 1! 2! pi^2 for exp(-sum |z|^2), rescaled by 2^{-3}
    const double ginibre = std::log(std::pow(std::numbers::pi, 2) * 2.0 / std::pow(2.0, 3));
    CHECK(exact_logZ_small_N(g2, 64).log_z == doctest::Approx(ginibre).epsilon(1e-9));
    // importance sampling at N = 3 against the closed form
    const auto is = exact_logZ_small_N(log_gas(3, 2.0), 400000, 5);
    CHECK(std::abs(is.log_z - hermite_log_z(3, 2.0, 1.0)) < 4 * is.std_error + 1e-3);
    CHECK_THROWS_AS(exact_logZ_small_N(log_gas(5, 2.0), 10), ParameterError);
}

TEST_CASE("thermodynamic integration") {
    // H_N equals the reference Hamiltonian, so the integrand vanishes
    const auto degenerate = log_gas(1, 2.0, 0.5);
    const auto d = thermo_integrate_logZ(degenerate, {0.0, 0.5, 1.0}, {50, 200, 1}, 1);
    CHECK(d.log_z == doctest::Approx(reference_log_partition(degenerate)).epsilon(1e-14));
    for (double v : d.means) CHECK(std::abs(v) < 1e-12);

    const auto m = log_gas(2, 2.0);
    std::vector<double> lambdas;
    for (int k = 0; k <= 32; ++k) lambdas.push_back(k / 32.0);
    const auto est = thermo_integrate_logZ(m, lambdas, {1000, 100000, 1}, 11);
    const double exact = exact_logZ_small_N(m, 64).log_z;
    MESSAGE("TI " << est.log_z << " +- " << est.std_error << " exact " << exact);
    CHECK(std::abs(est.log_z - exact) <= 2 * est.std_error + 1e-9);
    CHECK(std::abs(est.log_z - exact) <= 0.01 * std::abs(exact));
}
