#include "rgl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "quadrature.hpp"
#include "rgl/errors.hpp"

namespace rgl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// -log of a product of squared distances, renormalized to stay in range
struct LogProduct {
    double mant = 1.0;
    long expo = 0;
    void renorm() {
        int e = 0;
        mant = std::frexp(mant, &e);
        expo += e;
    }
    double log() const { return std::log(mant) + expo * std::numbers::ln2; }
};

// change of the ordered-pair sum when particle i moves from xo to xn
double pair_delta(const Configuration& c, std::size_t i, const double* xn, const KernelSpec& k) {
    const int d = c.d;
    const std::size_t n = c.size();
    const double* xs = c.coords.data();
    const double* xo = xs + i * d;
    if (k.is_log()) {
        LogProduct pn, po;
        int run = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double dn = 0.0, dq = 0.0;
            for (int a = 0; a < d; ++a) {
                const double t = xn[a] - xs[j * d + a];
                const double u = xo[a] - xs[j * d + a];
                dn += t * t;
                dq += u * u;
            }
            pn.mant *= dn;
            po.mant *= dq;
            if (++run == 8) {
                run = 0;
                if (pn.mant == 0.0) return kInf;
                pn.renorm();
                po.renorm();
            }
        }
        if (pn.mant == 0.0) return kInf;
        if (std::isfinite(pn.mant) && std::isfinite(po.mant) && po.mant > 0.0) return -(pn.log() - po.log());
        // fall back to a direct sum when the running product left the range
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double rn = squared_distance(xn, xs + j * d, d);
            if (rn <= 0.0) return kInf;
            acc += -0.5 * std::log(rn) + 0.5 * std::log(squared_distance(xo, xs + j * d, d));
        }
        return 2.0 * acc;
    }
    double acc = 0.0;
    const double s = k.s();
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double rn = squared_distance(xn, xs + j * d, d);
        if (rn <= 0.0) return kInf;
        const double ro = squared_distance(xo, xs + j * d, d);
        if (s == 1.0)
            acc += 1.0 / std::sqrt(rn) - 1.0 / std::sqrt(ro);
        else
            acc += std::exp(-0.5 * s * std::log(rn)) - std::exp(-0.5 * s * std::log(ro));
    }
    return 2.0 * acc;
}

double squared_norm(const double* x, int d) {
    double r = 0.0;
    for (int a = 0; a < d; ++a) r += x[a] * x[a];
    return r;
}

Configuration initial_configuration(const GasModel& m, Rng& rng) {
    const int d = m.kernel.d;
    Configuration c(d, Scale::Macro);
    c.coords.reserve(static_cast<std::size_t>(m.N) * d);
    if (m.mu) {
        const EquilibriumMeasure& mu = *m.mu;
        std::vector<double> cdf(mu.density.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cdf.size(); ++i) {
            acc += mu.density[i];
            cdf[i] = acc;
        }
        double center[3];
        for (int p = 0; p < m.N; ++p) {
            const double u = rng.uniform() * acc;
            std::size_t cell = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            cell = std::min(cell, cdf.size() - 1);
            mu.grid.center(cell, std::span<double>(center, static_cast<std::size_t>(d)));
            for (int a = 0; a < d; ++a) c.coords.push_back(center[a] + (rng.uniform() - 0.5) * mu.grid.h);
        }
        return c;
    }
    double scale = 0.7;
    if (m.V.kind == PotentialSpec::Kind::Quadratic) scale = 1.0 / std::sqrt(m.V.a);
    for (int p = 0; p < m.N * d; ++p) c.coords.push_back(scale * 0.5 * rng.normal());
    return c;
}

double initial_step(const GasModel& m) {
    double extent = 1.0;
    if (m.mu) extent = 0.5 * std::pow(std::max(m.mu->sigma_volume, 1e-12), 1.0 / m.kernel.d);
    return extent * std::pow(static_cast<double>(m.N), -1.0 / m.kernel.d);
}

template <class F>
void run_parallel(std::size_t count, int workers, F&& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t t = 0; t < w; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (std::size_t k = t; k < count; k += w) body(k);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    if (index == 0) return seed;
    return splitmix64(seed ^ splitmix64(index));
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::string Rng::state() const {
    std::ostringstream os;
    os << engine_ << ' ' << normal_;
    return os.str();
}

void Rng::restore(const std::string& s) {
    std::istringstream is(s);
    is >> engine_ >> normal_;
    if (!is) throw InputError("malformed generator state");
}

ChainState init_chain(const GasModel& m, std::uint64_t seed) {
    Rng rng(seed);
    Configuration c = initial_configuration(m, rng);
    ChainState s;
    s.config = std::move(c);
    s.rng = rng;
    s.step_size = initial_step(m);
    resync(s, m);
    return s;
}

ChainState init_chain(const GasModel& m, std::uint64_t seed, Configuration start) {
    if (static_cast<int>(start.size()) != m.N || start.d != m.kernel.d)
        throw InputError("start configuration does not match the model");
    ChainState s;
    s.config = std::move(start);
    s.rng = Rng(seed);
    s.step_size = initial_step(m);
    resync(s, m);
    return s;
}

void resync(ChainState& s, const GasModel& m) {
    s.pair = pair_energy(s.config, m.kernel);
    s.sum_v = 0.0;
    s.sum_x2 = 0.0;
    for (std::size_t i = 0; i < s.config.size(); ++i) {
        s.sum_v += m.V(s.config.point(i));
        s.sum_x2 += squared_norm(&s.config.coords[i * s.config.d], s.config.d);
    }
}

void metropolis_sweep(ChainState& s, const GasModel& m, bool adapt, double lambda) {
    const int d = s.config.d;
    const std::size_t n = s.config.size();
    const double f = m.gibbs_factor();
    const double N = m.N;
    double xn[3];
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double* xo = &s.config.coords[i * d];
        for (int a = 0; a < d; ++a) xn[a] = xo[a] + s.step_size * s.rng.normal();
        const double u = s.rng.uniform();
        ++s.proposed;
        const std::span<const double> pn(xn, static_cast<std::size_t>(d));
        const double vn = m.V(pn);
        if (!std::isfinite(vn)) continue;
        const double dv = vn - m.V(std::span<const double>(xo, static_cast<std::size_t>(d)));
        const double dx2 = squared_norm(xn, d) - squared_norm(xo, d);
        const double dp = pair_delta(s.config, i, xn, m.kernel);
        if (!std::isfinite(dp)) continue;
        const double de = lambda * dp + N * (lambda * dv + (1.0 - lambda) * 0.5 * dx2);
        if (de <= 0.0 || u < std::exp(-f * de)) {
            for (int a = 0; a < d; ++a) xo[a] = xn[a];
            s.pair += dp;
            s.sum_v += dv;
            s.sum_x2 += dx2;
            ++s.accepted;
            ++acc;
        }
    }
    ++s.sweep;
    if (s.sweep % 1000 == 0) resync(s, m);
    if (adapt && n > 0) {
        const double rate = static_cast<double>(acc) / static_cast<double>(n);
        s.step_size *= std::exp(rate - 0.3);
        s.step_size = std::clamp(s.step_size, 1e-8, 1e3);
    }
}

double integrated_autocorrelation(const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    if (n < 16) return 1.0;
    double mean = 0.0;
    for (double v : trace) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : trace) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    if (!(var > 0.0)) return 1.0;
    const double se = batch_means_stderr(trace);
    return std::max(1.0, se * se * static_cast<double>(n) / var);
}

double batch_means_stderr(const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    if (n < 2) return 0.0;
    std::size_t batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    batches = std::max<std::size_t>(batches, 2);
    const std::size_t size = n / batches;
    if (size == 0) return 0.0;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t k = 0; k < size; ++k) means[b] += trace[b * size + k];
        means[b] /= static_cast<double>(size);
    }
    double mm = 0.0;
    for (double v : means) mm += v;
    mm /= static_cast<double>(batches);
    double var = 0.0;
    for (double v : means) var += (v - mm) * (v - mm);
    var /= static_cast<double>(batches - 1);
    return std::sqrt(var / static_cast<double>(batches));
}

bool advance_chain(ChainState& state, const GasModel& m, const ChainPlan& plan, SampleSet& out,
                   std::optional<std::uint64_t> stop_after) {
    const std::uint64_t total = plan.n_burn + plan.n_sweeps;
    while (state.sweep < total) {
        if (stop_after && state.sweep >= *stop_after) return false;
        const bool burn = state.sweep < plan.n_burn;
        const std::uint64_t before = state.accepted;
        metropolis_sweep(state, m, burn, plan.lambda);
        if (burn) {
            if (state.sweep == plan.n_burn) {
                state.accepted = 0;
                state.proposed = 0;
            }
            continue;
        }
        const std::uint64_t k = state.sweep - plan.n_burn;
        const double h = state.hamiltonian(m);
        out.diagnostics.energy_trace.push_back(h);
        out.diagnostics.acceptance_trace.push_back(
            state.config.size() ? static_cast<double>(state.accepted - before) / static_cast<double>(state.config.size())
                                : 0.0);
        if (plan.record_w) out.diagnostics.w_trace.push_back(next_order_energy(h, state.config, m));
        if (plan.thin > 0 && k % plan.thin == 0) {
            out.configs.push_back(state.config);
            out.sweep_indices.push_back(state.sweep);
        }
    }
    return true;
}

void finalize(SampleSet& set, const ChainState& state) {
    set.diagnostics.acceptance_rate =
        state.proposed ? static_cast<double>(state.accepted) / static_cast<double>(state.proposed) : 0.0;
    set.diagnostics.tau = integrated_autocorrelation(set.diagnostics.energy_trace);
    set.diagnostics.step_size = state.step_size;
}

SampleSet run_chain(const GasModel& m, std::uint64_t n_burn, std::uint64_t n_sweeps, std::uint64_t thin,
                    std::uint64_t seed) {
    ChainState state = init_chain(m, seed);
    SampleSet set;
    set.model = m;
    ChainPlan plan{n_burn, n_sweeps, thin, 1.0};
    advance_chain(state, m, plan, set);
    finalize(set, state);
    return set;
}

TemperingResult parallel_tempering(const std::vector<GasModel>& ladder, const TemperingSchedule& schedule,
                                   std::uint64_t seed) {
    if (ladder.empty()) throw ParameterError("tempering ladder is empty");
    const GasModel& base = ladder.front();
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const GasModel& g = ladder[k];
        if (!(g.kernel == base.kernel) || !(g.V == base.V) || g.N != base.N || g.mu != base.mu)
            throw ParameterError("tempering rungs must share kernel, potential, measure and N");
        if (k > 0 && g.beta < ladder[k - 1].beta) throw ParameterError("tempering ladder must be non-decreasing in beta");
    }
    if (schedule.swap_interval == 0) throw ParameterError("swap interval must be positive");
    const std::size_t R = ladder.size();
    std::vector<ChainState> states;
    TemperingResult res;
    res.rungs.resize(R);
    for (std::size_t k = 0; k < R; ++k) {
        states.push_back(init_chain(ladder[k], derive_seed(seed, k)));
        res.rungs[k].model = ladder[k];
    }
    Rng swap_rng(derive_seed(seed, 0xFFFFFFFFULL));
    std::vector<std::uint64_t> tried(R > 1 ? R - 1 : 0, 0), taken(R > 1 ? R - 1 : 0, 0);
    const std::uint64_t total = schedule.plan.n_burn + schedule.plan.n_sweeps;
    std::uint64_t done = 0;
    int parity = 0;
    while (done < total) {
        const std::uint64_t stop = std::min(total, done + schedule.swap_interval);
        run_parallel(R, schedule.workers,
                     [&](std::size_t k) { advance_chain(states[k], ladder[k], schedule.plan, res.rungs[k], stop); });
        done = stop;
        if (done >= total) break;
        for (std::size_t k = static_cast<std::size_t>(parity); k + 1 < R; k += 2) {
            const double bi = ladder[k].effective_beta(), bj = ladder[k + 1].effective_beta();
            const double hi = states[k].hamiltonian(ladder[k]), hj = states[k + 1].hamiltonian(ladder[k + 1]);
            const double log_alpha = 0.5 * (bi - bj) * (hi - hj);
            ++tried[k];
            if (log_alpha >= 0.0 || swap_rng.uniform() < std::exp(log_alpha)) {
                ++taken[k];
                std::swap(states[k].config, states[k + 1].config);
                std::swap(states[k].pair, states[k + 1].pair);
                std::swap(states[k].sum_v, states[k + 1].sum_v);
                std::swap(states[k].sum_x2, states[k + 1].sum_x2);
            }
        }
        parity ^= 1;
    }
    for (std::size_t k = 0; k < R; ++k) finalize(res.rungs[k], states[k]);
    for (std::size_t k = 0; k + 1 < R; ++k)
        res.swap_acceptance.push_back(tried[k] ? static_cast<double>(taken[k]) / static_cast<double>(tried[k]) : 0.0);
    return res;
}

double reference_log_partition(const GasModel& m) {
    const double a = m.gibbs_factor() * m.N * 0.5;
    return 0.5 * m.N * m.kernel.d * std::log(std::numbers::pi / a);
}

FreeEnergyEstimate thermo_integrate_logZ(const GasModel& m, const std::vector<double>& lambdas,
                                         const FreeEnergyPlan& plan, std::uint64_t seed) {
    if (lambdas.size() < 2 || lambdas.front() != 0.0 || lambdas.back() != 1.0)
        throw ParameterError("lambda grid must start at 0 and end at 1");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (!(lambdas[k] > lambdas[k - 1])) throw ParameterError("lambda grid must be strictly increasing");
    if (plan.n_sweeps < 2) throw ParameterError("free-energy budget needs at least two sweeps per rung");
    const std::size_t K = lambdas.size();
    FreeEnergyEstimate est;
    est.lambdas = lambdas;
    est.means.assign(K, 0.0);
    est.std_errors.assign(K, 0.0);
    est.taus.assign(K, 0.0);
    run_parallel(K, plan.workers, [&](std::size_t k) {
        ChainState s = init_chain(m, derive_seed(seed, k));
        for (std::uint64_t t = 0; t < plan.n_burn; ++t) metropolis_sweep(s, m, true, lambdas[k]);
        std::vector<double> trace;
        trace.reserve(plan.n_sweeps);
        for (std::uint64_t t = 0; t < plan.n_sweeps; ++t) {
            metropolis_sweep(s, m, false, lambdas[k]);
            trace.push_back(s.hamiltonian(m) - s.reference(m));
        }
        double mean = 0.0;
        for (double v : trace) mean += v;
        est.means[k] = mean / static_cast<double>(trace.size());
        est.std_errors[k] = batch_means_stderr(trace);
        est.taus[k] = integrated_autocorrelation(trace);
    });
    for (std::size_t k = 0; k < K; ++k) {
        if (est.taus[k] > static_cast<double>(plan.n_sweeps) / 50.0) {
            std::ostringstream os;
            os << "free-energy rung " << k << " (lambda=" << lambdas[k] << ") has autocorrelation time " << est.taus[k]
               << " sweeps, more than budget/50";
            throw BudgetError(os.str());
        }
    }
    // composite Simpson on consecutive interval pairs (unequal widths
    // allowed); an even point count leaves the last interval to the trapezoid
    std::vector<double> w(K, 0.0);
    std::size_t k0 = 0;
    for (; k0 + 2 < K; k0 += 2) {
        const double h0 = lambdas[k0 + 1] - lambdas[k0], h1 = lambdas[k0 + 2] - lambdas[k0 + 1];
        const double c = (h0 + h1) / 6.0;
        w[k0] += c * (2.0 - h1 / h0);
        w[k0 + 1] += c * (h0 + h1) * (h0 + h1) / (h0 * h1);
        w[k0 + 2] += c * (2.0 - h0 / h1);
    }
    if (k0 + 1 < K) {
        w[k0] += 0.5 * (lambdas[k0 + 1] - lambdas[k0]);
        w[k0 + 1] += 0.5 * (lambdas[k0 + 1] - lambdas[k0]);
    }
    double integral = 0.0, var = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        integral += w[k] * est.means[k];
        var += w[k] * w[k] * est.std_errors[k] * est.std_errors[k];
    }
    const double f = m.gibbs_factor();
    est.log_z_ref = reference_log_partition(m);
    est.log_z = est.log_z_ref - f * integral;
    est.std_error = f * std::sqrt(var);
    return est;
}

namespace {

// log of sum exp over a list, with integration weights
struct LogAccumulator {
    std::vector<double> logs;
    double total() const {
        double mx = -kInf;
        for (double v : logs) mx = std::max(mx, v);
        if (!std::isfinite(mx)) return -kInf;
        double s = 0.0;
        for (double v : logs) s += std::exp(v - mx);
        return mx + std::log(s);
    }
};

// composite Gauss-Legendre nodes on [a, b] with `panels` pieces
void composite(double a, double b, std::uint64_t panels, std::vector<double>& x, std::vector<double>& w) {
    const detail::Rule& r = detail::gauss_rule(20);
    const double h = (b - a) / static_cast<double>(panels);
    x.clear();
    w.clear();
    for (std::uint64_t p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            x.push_back(lo + 0.5 * h * (r.x[q] + 1.0));
            w.push_back(0.5 * h * r.w[q]);
        }
    }
}

double unit_g(const KernelSpec& k, double r) { return k.is_log() ? -std::log(r) : std::pow(r, -k.s()); }

LogZ importance_sampling(const GasModel& m, std::uint64_t budget, std::uint64_t seed) {
    const int d = m.kernel.d;
    const int N = m.N;
    double sigma = 1.0, center[3] = {0.0, 0.0, 0.0};
    if (m.V.kind == PotentialSpec::Kind::Quadratic) {
        sigma = 1.0 / std::sqrt(m.V.a);
    } else {
        double w = 0.0;
        for (int a = 0; a < d; ++a) {
            const double lo = m.V.lower[a], hi = lo + (m.V.n[a] - 1) * m.V.h;
            center[a] = 0.5 * (lo + hi);
            w = std::max(w, hi - lo);
        }
        sigma = 0.25 * w;
    }
    const double f = m.gibbs_factor();
    Rng rng(seed);
    std::vector<double> logw;
    logw.reserve(budget);
    Configuration c(d, Scale::Macro, std::vector<double>(static_cast<std::size_t>(N) * d));
    const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma);
    for (std::uint64_t t = 0; t < budget; ++t) {
        double logq = 0.0;
        for (int p = 0; p < N; ++p)
            for (int a = 0; a < d; ++a) {
                const double z = rng.normal();
                c.coords[p * d + a] = center[a] + sigma * z;
                logq += -0.5 * z * z - log_norm;
            }
        const double h = hamiltonian(c, m);
        logw.push_back(std::isfinite(h) ? -f * h - logq : -kInf);
    }
    double mx = -kInf;
    for (double v : logw) mx = std::max(mx, v);
    double s = 0.0, s2 = 0.0;
    for (double v : logw) {
        const double e = std::exp(v - mx);
        s += e;
        s2 += e * e;
    }
    const double n = static_cast<double>(budget);
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    LogZ out;
    out.log_z = mx + std::log(mean);
    out.std_error = std::sqrt(var / n) / mean;
    return out;
}

}  // namespace

LogZ exact_logZ_small_N(const GasModel& m, std::uint64_t budget, std::uint64_t seed) {
    if (m.N > 4) throw ParameterError("exact partition function is limited to N <= 4");
    if (budget == 0) throw ParameterError("budget must be positive");
    const int d = m.kernel.d;
    const double f = m.gibbs_factor();
    const bool quadratic = m.V.kind == PotentialSpec::Kind::Quadratic;
    if (m.N <= 2 && (d == 1 || quadratic)) {
        std::vector<double> x, w, y, wy;
        LogAccumulator acc;
        if (m.N == 1) {
            if (quadratic && d > 1) return {0.5 * d * std::log(std::numbers::pi / (f * m.V.a)) - f * m.V.offset, 0.0};
            double lo, hi;
            if (quadratic) {
                hi = std::sqrt(80.0 / (f * m.V.a)) + 1.0;
                lo = -hi;
            } else {
                lo = m.V.lower[0];
                hi = lo + (m.V.n[0] - 1) * m.V.h;
            }
            composite(lo, hi, budget, x, w);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double v = m.V(std::span<const double>(&x[i], 1));
                if (std::isfinite(v)) acc.logs.push_back(std::log(w[i]) - f * v);
            }
            return {acc.total(), 0.0};
        }
        if (d == 1) {
            double ulo, uhi, vmax;
            if (quadratic) {
                uhi = std::sqrt(80.0 / (f * m.V.a)) + 1.0;
                ulo = -uhi;
                vmax = 2.0 * uhi;
            } else {
                ulo = m.V.lower[0];
                uhi = ulo + (m.V.n[0] - 1) * m.V.h;
                vmax = uhi - ulo;
            }
            composite(ulo, uhi, budget, x, w);
            composite(0.0, vmax, budget, y, wy);
            for (std::size_t i = 0; i < x.size(); ++i) {
                for (std::size_t j = 0; j < y.size(); ++j) {
                    const double p1 = x[i] + 0.5 * y[j], p2 = x[i] - 0.5 * y[j];
                    const double v = m.V(std::span<const double>(&p1, 1)) + m.V(std::span<const double>(&p2, 1));
                    if (!std::isfinite(v)) continue;
                    const double h = 2.0 * unit_g(m.kernel, y[j]) + 2.0 * v;
                    // factor 2 for the mirrored half v < 0
                    acc.logs.push_back(std::log(2.0 * w[i] * wy[j]) - f * h);
                }
            }
            return {acc.total(), 0.0};
        }
        // quadratic V in d >= 2 separates into centre of mass and radial gap
        const double a = m.V.a;
        const double log_u = 0.5 * d * std::log(std::numbers::pi / (4.0 * f * a));
        const double rmax = std::sqrt(120.0 / (f * a)) + 1.0;
        composite(0.0, rmax, budget, y, wy);
        const double log_sphere = std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d);
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double r = y[j];
            acc.logs.push_back(std::log(wy[j]) + (d - 1) * std::log(r) - 2.0 * f * unit_g(m.kernel, r) - f * a * r * r);
        }
        return {log_u + log_sphere + acc.total() - 2.0 * 2.0 * f * m.V.offset, 0.0};
    }
    return importance_sampling(m, budget, seed);
}

}  // namespace rgl
