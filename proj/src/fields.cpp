#include "rgl/fields.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "assignment.hpp"
#include "rgl/errors.hpp"

namespace rgl {

namespace {

double canonical(std::mt19937_64& rng) { return std::generate_canonical<double, 53>(rng); }

// points of c shifted by -tag and scaled, kept when inside [-R, R)^d
Configuration cut_window(const Configuration& c, std::span<const double> tag, double scale, double R) {
    const int d = c.d;
    Configuration w(d, Scale::Micro);
    std::vector<double> y(d);
    for (std::size_t i = 0; i < c.size(); ++i) {
        bool inside = true;
        for (int k = 0; k < d && inside; ++k) {
            y[k] = scale * (c.coords[i * d + k] - tag[k]);
            inside = y[k] >= -R && y[k] < R;
        }
        if (inside) w.push_back(y);
    }
    return w;
}

double unit_ball_volume(int d) { return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

}  // namespace

void EmpiricalField::append(const EmpiricalField& o) {
    if (o.d != d || o.window_radius != window_radius) throw InputError("fields have different windows");
    tags.insert(tags.end(), o.tags.begin(), o.tags.end());
    windows.insert(windows.end(), o.windows.begin(), o.windows.end());
    intensities.insert(intensities.end(), o.intensities.begin(), o.intensities.end());
}

EmpiricalField empirical_field(const Configuration& c, const GasModel& m, int n_tags, double R_w, std::uint64_t seed) {
    if (!m.mu) throw InputError("empirical field needs a solved equilibrium measure");
    if (static_cast<int>(c.size()) != m.N) throw InputError("configuration size does not match the model");
    if (c.d != m.kernel.d) throw InputError("configuration dimension does not match the model");
    if (!(R_w >= 1.0)) throw ParameterError("window radius must be at least 1");
    if (n_tags < 1) throw ParameterError("need at least one tag");
    const EquilibriumMeasure& mu = *m.mu;
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < mu.support_mask.size(); ++i)
        if (mu.support_mask[i]) support.push_back(i);
    if (support.empty()) throw InputError("equilibrium measure has empty support");
    const int d = c.d;
    const double scale = std::pow(static_cast<double>(m.N), 1.0 / d);
    EmpiricalField f;
    f.d = d;
    f.N = m.N;
    f.window_radius = R_w;
    std::mt19937_64 rng(seed);
    std::vector<double> centre(d), tag(d);
    for (int t = 0; t < n_tags; ++t) {
        const auto pick = std::min(support.size() - 1, static_cast<std::size_t>(canonical(rng) * support.size()));
        const std::size_t cell = support[pick];
        mu.grid.center(cell, centre);
        for (int k = 0; k < d; ++k) tag[k] = centre[k] + (canonical(rng) - 0.5) * mu.grid.h;
        f.tags.insert(f.tags.end(), tag.begin(), tag.end());
        f.windows.push_back(cut_window(c, tag, scale, R_w));
        f.intensities.push_back(mu.density[cell]);
    }
    return f;
}

EmpiricalField field_from_micro(const Configuration& c, const Window& region, double intensity, int n_tags, double R_w,
                                std::uint64_t seed) {
    if (region.d() != c.d) throw InputError("region dimension does not match the configuration");
    if (!(R_w > 0.0)) throw ParameterError("window radius must be positive");
    for (int k = 0; k < c.d; ++k)
        if (region.side[k] <= 2.0 * R_w) throw ParameterError("region too small for the window radius");
    EmpiricalField f;
    f.d = c.d;
    f.window_radius = R_w;
    std::mt19937_64 rng(seed);
    std::vector<double> tag(c.d);
    for (int t = 0; t < n_tags; ++t) {
        for (int k = 0; k < c.d; ++k) tag[k] = region.lower(k) + R_w + canonical(rng) * (region.side[k] - 2.0 * R_w);
        f.tags.insert(f.tags.end(), tag.begin(), tag.end());
        f.windows.push_back(cut_window(c, tag, 1.0, R_w));
        f.intensities.push_back(intensity);
    }
    return f;
}

EmpiricalField field_from_windows(std::vector<Configuration> windows, double intensity, double R_w) {
    EmpiricalField f;
    if (windows.empty()) throw InputError("no windows given");
    f.d = windows.front().d;
    f.window_radius = R_w;
    for (const auto& w : windows) {
        if (w.d != f.d) throw InputError("windows have mixed dimensions");
        for (double x : w.coords)
            if (x < -R_w || x >= R_w) throw InputError("window point outside [-R_w, R_w)");
    }
    f.tags.assign(windows.size() * f.d, 0.0);
    f.intensities.assign(windows.size(), intensity);
    f.windows = std::move(windows);
    return f;
}

double bounded_lipschitz_distance(const Configuration& a, const Configuration& b) {
    if (a.d != b.d) throw InputError("configurations have different dimensions");
    const int n = static_cast<int>(a.size()), np = static_cast<int>(b.size());
    const int S = n + np;
    if (static_cast<std::size_t>(S) > kAssignmentMaxPoints)
        throw BudgetError("bounded-Lipschitz distance limited to " + std::to_string(kAssignmentMaxPoints) + " points");
    // rows: points of a, then deletion slots for b; columns: points of b, then
    // deletion slots for a. Unmatched mass costs 1 per point.
    std::vector<double> cost(static_cast<std::size_t>(S) * S, 0.0);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) {
            double c;
            if (i < n && j < np)
                c = std::min(2.0, std::sqrt(squared_distance(&a.coords[i * a.d], &b.coords[j * b.d], a.d)));
            else if (i < n || j < np)
                c = 1.0;
            else
                c = 0.0;
            cost[static_cast<std::size_t>(i) * S + j] = c;
        }
    return detail::min_cost_assignment(cost, S);
}

double config_distance(const Configuration& a, const Configuration& b, int K_max) {
    if (K_max < 1) throw ParameterError("K_max must be at least 1");
    if (a.d != b.d) throw InputError("configurations have different dimensions");
    auto restrict = [](const Configuration& c, double half) {
        Configuration r(c.d, c.scale);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto p = c.point(i);
            if (std::all_of(p.begin(), p.end(), [&](double x) { return std::abs(x) <= half; })) r.push_back(p);
        }
        return r;
    };
    const auto ak = restrict(a, 0.5 * K_max), bk = restrict(b, 0.5 * K_max);
    if (ak.size() + bk.size() > kAssignmentMaxPoints)
        throw BudgetError("K_max too large: " + std::to_string(ak.size() + bk.size()) + " points in the largest cube, limit " +
                          std::to_string(kAssignmentMaxPoints));
    double total = 0.0;
    for (int k = 1; k <= K_max; ++k) {
        const auto ra = restrict(ak, 0.5 * k), rb = restrict(bk, 0.5 * k);
        const double n = static_cast<double>(ra.size() + rb.size());
        const double dk = bounded_lipschitz_distance(ra, rb);
        total += std::ldexp(std::min(1.0, dk / std::max(n, 1.0)), -k);
    }
    return total;
}

TestFunctionFamily TestFunctionFamily::make(int d, double R_w) {
    if (d < 1 || d > 3) throw ParameterError("test functions support d in 1..3");
    if (!(R_w >= 1.0)) throw ParameterError("window radius must be at least 1");
    TestFunctionFamily T;
    T.d = d;
    T.window_radius = R_w;
    for (double side = 1.0; side <= R_w; side *= 2.0) {
        const double expected = std::pow(side, d);
        const int top = static_cast<int>(std::ceil(2.0 * expected));
        for (int j = 0; j <= top; ++j) T.members.push_back({side, static_cast<double>(j)});
        T.members.push_back({side, -1.0});
    }
    return T;
}

std::vector<double> TestFunctionFamily::evaluate(const Configuration& window) const {
    if (window.d != d) throw InputError("window dimension does not match the test family");
    std::vector<double> out(members.size(), 0.0);
    std::size_t first = 0;
    while (first < members.size()) {
        const double side = members[first].side;
        std::size_t last = first;
        while (last < members.size() && members[last].side == side) ++last;
        // shifts on a grid of spacing side/2 keeping the tent support inside
        const double limit = window_radius - 0.5 * (side + 1.0);
        const int steps = static_cast<int>(std::floor(limit / (0.5 * side) + 1e-12));
        const int per_axis = 2 * steps + 1;
        std::size_t total = 1;
        for (int k = 0; k < d; ++k) total *= per_axis;
        const double inner = 0.5 * (side - 1.0);
        const double norm = 2.0 * std::pow(side, d);
        std::vector<int> idx(d);
        for (std::size_t s = 0; s < total; ++s) {
            std::size_t rem = s;
            for (int k = d - 1; k >= 0; --k) {
                idx[k] = static_cast<int>(rem % per_axis) - steps;
                rem /= per_axis;
            }
            double n = 0.0;
            for (std::size_t i = 0; i < window.size(); ++i) {
                double dist = 0.0;
                for (int k = 0; k < d; ++k)
                    dist = std::max(dist, std::abs(window.coords[i * d + k] - idx[k] * 0.5 * side) - inner);
                n += std::max(0.0, 1.0 - std::max(0.0, dist));
            }
            for (std::size_t j = first; j < last; ++j) {
                const double level = members[j].level;
                out[j] += level < 0.0 ? std::min(1.0, n / norm) : std::max(0.0, 1.0 - std::abs(n - level));
            }
        }
        for (std::size_t j = first; j < last; ++j) out[j] /= static_cast<double>(total);
        first = last;
    }
    return out;
}

double field_distance(const EmpiricalField& a, const EmpiricalField& b, const TestFunctionFamily& T) {
    if (a.d != T.d || b.d != T.d) throw InputError("field dimension does not match the test family");
    if (a.window_radius < T.window_radius || b.window_radius < T.window_radius)
        throw InputError("field windows smaller than the test family radius");
    if (a.size() == 0 || b.size() == 0) throw InputError("empty field");
    auto means = [&](const EmpiricalField& f) {
        std::vector<double> m(T.members.size(), 0.0);
        for (const auto& w : f.windows) {
            const auto v = T.evaluate(w);
            for (std::size_t j = 0; j < m.size(); ++j) m[j] += v[j];
        }
        for (double& x : m) x /= static_cast<double>(f.size());
        return m;
    };
    const auto ma = means(a), mb = means(b);
    double best = 0.0;
    for (std::size_t j = 0; j < ma.size(); ++j) best = std::max(best, std::abs(ma[j] - mb[j]));
    return best;
}

double discrepancy(const Configuration& window, double m, double R, double window_radius) {
    if (!(R > 0.0)) throw ParameterError("discrepancy radius must be positive");
    if (R > 2.0 * window_radius * (1.0 + 1e-12))
        throw ParameterError("cube of side " + std::to_string(R) + " does not fit in the window");
    const int d = window.d;
    std::size_t count = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        bool inside = true;
        for (int k = 0; k < d && inside; ++k) {
            const double x = window.coords[i * d + k];
            inside = x >= -0.5 * R && x < 0.5 * R;
        }
        count += inside;
    }
    return static_cast<double>(count) - m * std::pow(R, d);
}

std::vector<VariancePoint> number_variance_curve(const EmpiricalField& f, const std::vector<double>& R_list) {
    if (f.size() < 2) throw InputError("number variance needs at least two windows");
    std::vector<VariancePoint> out;
    const double n = static_cast<double>(f.size());
    for (double R : R_list) {
        std::vector<double> D(f.size());
        for (std::size_t w = 0; w < f.size(); ++w) D[w] = discrepancy(f.windows[w], f.intensities[w], R, f.window_radius);
        double mean = 0.0;
        for (double x : D) mean += x;
        mean /= n;
        double m2 = 0.0, m4 = 0.0;
        for (double x : D) {
            const double e = (x - mean) * (x - mean);
            m2 += e;
            m4 += e * e;
        }
        const double var = m2 / (n - 1.0);
        const double fourth = m4 / n;
        const double se = std::sqrt(std::max(0.0, fourth - (m2 / n) * (m2 / n)) / n);
        out.push_back({R, var, se, mean});
    }
    return out;
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw ParameterError("invalid histogram range");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
    h.counts.assign(bins, 0);
    for (double v : values) {
        if (v < lo || v >= hi) continue;
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
        ++h.counts[b];
    }
    h.density.assign(bins, 0.0);
    const double width = (hi - lo) / bins;
    if (!values.empty())
        for (int b = 0; b < bins; ++b)
            h.density[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(values.size()) * width);
    return h;
}

Spacings spacing_histogram(const std::vector<Configuration>& samples, double bulk_fraction, int bins, double max_gap) {
    if (samples.empty()) throw InputError("no samples");
    if (!(bulk_fraction > 0.0 && bulk_fraction <= 1.0)) throw ParameterError("bulk fraction must lie in (0, 1]");
    const std::size_t N = samples.front().size();
    if (N < 16) throw InputError("spacing statistics need N >= 16, got " + std::to_string(N));
    std::vector<double> pooled;
    pooled.reserve(N * samples.size());
    for (const auto& c : samples) {
        if (c.d != 1) throw InputError("spacing statistics need d = 1");
        if (c.size() != N) throw InputError("samples have different sizes");
        pooled.insert(pooled.end(), c.coords.begin(), c.coords.end());
    }
    std::sort(pooled.begin(), pooled.end());
    const double M = static_cast<double>(samples.size());
    // unfolded coordinate: N times the pooled distribution function
    auto unfold = [&](double x) {
        const auto lo = std::lower_bound(pooled.begin(), pooled.end(), x);
        const auto hi = std::upper_bound(lo, pooled.end(), x);
        const double rank = 0.5 * static_cast<double>((lo - pooled.begin()) + (hi - pooled.begin()) - 1);
        return (rank + 0.5) / M;
    };
    const auto from = static_cast<std::size_t>(std::floor(0.5 * (1.0 - bulk_fraction) * N));
    const auto to = std::min(N, static_cast<std::size_t>(std::ceil(0.5 * (1.0 + bulk_fraction) * N)));
    Spacings s;
    std::vector<double> x;
    for (const auto& c : samples) {
        x = c.coords;
        std::sort(x.begin(), x.end());
        double prev = unfold(x[from]);
        for (std::size_t i = from + 1; i < to; ++i) {
            const double u = unfold(x[i]);
            s.gaps.push_back(u - prev);
            prev = u;
        }
    }
    if (s.gaps.empty()) throw InputError("bulk fraction leaves no gaps");
    double mean = 0.0;
    for (double g : s.gaps) mean += g;
    mean /= static_cast<double>(s.gaps.size());
    for (double& g : s.gaps) g /= mean;
    s.histogram = make_histogram(s.gaps, 0.0, max_gap, bins);
    return s;
}

std::vector<PairCorrelationRow> pair_correlation(const EmpiricalField& f, const std::vector<double>& r_edges) {
    if (r_edges.size() < 2) throw ParameterError("need at least one bin");
    for (std::size_t i = 1; i < r_edges.size(); ++i)
        if (!(r_edges[i] > r_edges[i - 1])) throw ParameterError("bin edges must increase");
    if (r_edges.front() < 0.0 || r_edges.back() > f.window_radius)
        throw ParameterError("bins must lie within the window radius");
    const int d = f.d;
    const double L = 2.0 * f.window_radius;
    const std::size_t nb = r_edges.size() - 1;
    std::vector<double> num(nb, 0.0);
    double m2 = 0.0;
    for (std::size_t w = 0; w < f.size(); ++w) {
        const auto& c = f.windows[w];
        m2 += f.intensities[w] * f.intensities[w];
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) {
                double r2 = 0.0, overlap = 1.0;
                for (int k = 0; k < d; ++k) {
                    const double dx = c.coords[i * d + k] - c.coords[j * d + k];
                    r2 += dx * dx;
                    overlap *= L - std::abs(dx);
                }
                const double r = std::sqrt(r2);
                if (r < r_edges.front() || r >= r_edges.back()) continue;
                const auto b = static_cast<std::size_t>(std::upper_bound(r_edges.begin(), r_edges.end(), r) - r_edges.begin()) - 1;
                num[b] += 2.0 / overlap;
            }
    }
    std::vector<PairCorrelationRow> out(nb);
    const double vb = unit_ball_volume(d);
    for (std::size_t b = 0; b < nb; ++b) {
        const double shell = vb * (std::pow(r_edges[b + 1], d) - std::pow(r_edges[b], d));
        out[b] = {r_edges[b], r_edges[b + 1], m2 > 0.0 ? num[b] / (m2 * shell) : 0.0};
    }
    return out;
}

namespace {

// KL(p_hat || Poisson(lambda)) with counts at and above the 1 - 1e-6
// quantile lumped into one bin
double kl_to_poisson(const std::vector<std::size_t>& hist, std::size_t total, double lambda) {
    std::size_t K = 0;
    while (boost::math::gamma_q(static_cast<double>(K) + 1.0, lambda) < 1.0 - 1e-6) ++K;
    K = std::max<std::size_t>(K, 1);
    double kl = 0.0;
    double lumped = 0.0;
    for (std::size_t k = 0; k < hist.size(); ++k) {
        if (k >= K) {
            lumped += static_cast<double>(hist[k]);
            continue;
        }
        if (hist[k] == 0) continue;
        const double p = static_cast<double>(hist[k]) / static_cast<double>(total);
        const double logq = static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
        kl += p * (std::log(p) - logq);
    }
    if (lumped > 0.0) {
        const double p = lumped / static_cast<double>(total);
        const double q = boost::math::gamma_p(static_cast<double>(K), lambda);  // P(X >= K)
        kl += p * (std::log(p) - std::log(q));
    }
    return std::max(0.0, kl);
}

}  // namespace

EntropyEstimate entropy_rate_estimate(const std::vector<Configuration>& windows, double cell, double side) {
    if (windows.empty()) throw InputError("no windows");
    if (!(cell > 0.0) || !(side > 0.0)) throw ParameterError("cell and window side must be positive");
    const double ratio = side / cell;
    const long per_axis = std::lround(ratio);
    if (per_axis < 1 || std::abs(ratio - static_cast<double>(per_axis)) > 1e-9 * ratio)
        throw ParameterError("cell side must divide the window side");
    const int d = windows.front().d;
    std::size_t cells_per_window = 1;
    for (int k = 0; k < d; ++k) cells_per_window *= static_cast<std::size_t>(per_axis);
    const std::size_t total = cells_per_window * windows.size();
    if (total < kEntropyMinCells)
        throw InputError("entropy estimate needs at least " + std::to_string(kEntropyMinCells) + " cells, got " +
                         std::to_string(total));
    std::vector<std::size_t> hist;
    std::vector<std::size_t> counts(cells_per_window);
    std::size_t points = 0;
    for (const auto& w : windows) {
        if (w.d != d) throw InputError("windows have mixed dimensions");
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < w.size(); ++i) {
            std::size_t flat = 0;
            bool inside = true;
            for (int k = 0; k < d; ++k) {
                const double u = (w.coords[i * d + k] + 0.5 * side) / cell;
                const long b = static_cast<long>(std::floor(u));
                if (b < 0 || b >= per_axis) inside = false;
                flat = flat * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(std::clamp(b, 0L, per_axis - 1));
            }
            if (!inside) continue;
            ++counts[flat];
            ++points;
        }
        for (std::size_t n : counts) {
            if (n >= hist.size()) hist.resize(n + 1, 0);
            ++hist[n];
        }
    }
    const double vol = std::pow(cell, d);
    EntropyEstimate e;
    e.cells = total;
    e.intensity = static_cast<double>(points) / (static_cast<double>(total) * vol);
    e.unit_reference = kl_to_poisson(hist, total, vol) / vol;
    e.matched_reference = e.intensity > 0.0 ? kl_to_poisson(hist, total, vol * e.intensity) / vol
                                            : std::numeric_limits<double>::infinity();
    return e;
}

EntropyEstimate entropy_rate_estimate(const EmpiricalField& f, double cell) {
    return entropy_rate_estimate(f.windows, cell, 2.0 * f.window_radius);
}

double rate_function_estimate(double W_hat, double Ent_hat, double beta, double sigma_volume) {
    if (!(beta > 0.0)) throw ParameterError("inverse temperature must be positive");
    if (!std::isfinite(W_hat) || !std::isfinite(Ent_hat) || !std::isfinite(sigma_volume))
        throw InputError("rate function inputs must be finite");
    if (std::isinf(beta)) return 0.5 * W_hat;
    return 0.5 * W_hat + (Ent_hat + 1.0 - sigma_volume) / beta;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InputError("KS distance needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

double ks_exponential(std::vector<double> a) {
    if (a.empty()) throw InputError("KS distance needs a non-empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double F = a[i] > 0.0 ? -std::expm1(-a[i]) : 0.0;
        best = std::max({best, std::abs(static_cast<double>(i + 1) / n - F), std::abs(F - static_cast<double>(i) / n)});
    }
    return best;
}

double chi2_uniform_pvalue(const std::vector<std::size_t>& counts) {
    if (counts.size() < 2) throw InputError("chi-square test needs at least two cells");
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    if (!(total > 0.0)) throw InputError("chi-square test needs data");
    const double expect = total / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (auto c : counts) chi2 += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
    return boost::math::gamma_q(0.5 * static_cast<double>(counts.size() - 1), 0.5 * chi2);
}

namespace {

// integral over [x0, x1] of |c - (f0 + (f1 - f0) t)| with t the unit position
double abs_linear_integral(double c, double f0, double f1, double len) {
    const double a = f0 - c, b = f1 - c;
    if (a * b >= 0.0) return 0.5 * std::abs(a + b) * len;
    return 0.5 * len * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

}  // namespace

double wasserstein1_to_measure(std::vector<double> points, const EquilibriumMeasure& mu) {
    if (mu.grid.d != 1) throw InputError("Wasserstein distance to a measure needs d = 1");
    if (points.empty()) throw InputError("no points");
    std::sort(points.begin(), points.end());
    const GridSpec& g = mu.grid;
    const std::size_t n = mu.density.size();
    std::vector<double> edge_cdf(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) edge_cdf[i + 1] = edge_cdf[i] + mu.density[i] * g.h;
    const double mass = edge_cdf.back();
    for (double& v : edge_cdf) v /= mass;
    auto F = [&](double x) {
        if (x <= g.lower[0]) return 0.0;
        if (x >= g.upper(0)) return 1.0;
        const double u = (x - g.lower[0]) / g.h;
        const auto i = std::min(n - 1, static_cast<std::size_t>(u));
        return edge_cdf[i] + (edge_cdf[i + 1] - edge_cdf[i]) * (u - static_cast<double>(i));
    };
    // breakpoints: sample points and cell edges
    std::vector<double> xs = points;
    for (std::size_t i = 0; i <= n; ++i) xs.push_back(g.lower[0] + static_cast<double>(i) * g.h);
    std::sort(xs.begin(), xs.end());
    const double np = static_cast<double>(points.size());
    double total = 0.0;
    std::size_t rank = 0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        while (rank < points.size() && points[rank] <= xs[k]) ++rank;
        const double len = xs[k + 1] - xs[k];
        if (len <= 0.0) continue;
        total += abs_linear_integral(static_cast<double>(rank) / np, F(xs[k]), F(xs[k + 1]), len);
    }
    return total;
}

double wasserstein1_to_cdf(std::vector<double> points, const std::function<double(double)>& cdf, double lo, double hi) {
    if (points.empty()) throw InputError("no points");
    if (!(hi > lo)) throw ParameterError("invalid support");
    std::sort(points.begin(), points.end());
    std::vector<double> xs = points;
    const int fine = 20000;
    for (int i = 0; i <= fine; ++i) xs.push_back(lo + (hi - lo) * i / fine);
    std::sort(xs.begin(), xs.end());
    const double np = static_cast<double>(points.size());
    auto F = [&](double x) { return x <= lo ? 0.0 : (x >= hi ? 1.0 : cdf(x)); };
    double total = 0.0;
    std::size_t rank = 0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        while (rank < points.size() && points[rank] <= xs[k]) ++rank;
        const double len = xs[k + 1] - xs[k];
        if (len <= 0.0) continue;
        total += abs_linear_integral(static_cast<double>(rank) / np, F(xs[k]), F(xs[k + 1]), len);
    }
    return total;
}

std::vector<double> radial_density(const std::vector<Configuration>& samples, const std::vector<double>& r_edges) {
    if (r_edges.size() < 2) throw ParameterError("need at least one annulus");
    std::vector<double> counts(r_edges.size() - 1, 0.0);
    for (const auto& c : samples) {
        if (c.d != 2) throw InputError("radial density needs planar configurations");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double r = std::hypot(c.coords[2 * i], c.coords[2 * i + 1]);
            if (r < r_edges.front() || r >= r_edges.back()) continue;
            const auto b = static_cast<std::size_t>(std::upper_bound(r_edges.begin(), r_edges.end(), r) - r_edges.begin()) - 1;
            counts[b] += 1.0;
        }
    }
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double area = std::numbers::pi * (r_edges[b + 1] * r_edges[b + 1] - r_edges[b] * r_edges[b]);
        counts[b] /= area * static_cast<double>(std::max<std::size_t>(samples.size(), 1));
    }
    return counts;
}

std::vector<std::size_t> angular_counts(const std::vector<Configuration>& samples, int sectors) {
    if (sectors < 2) throw ParameterError("need at least two sectors");
    std::vector<std::size_t> counts(sectors, 0);
    for (const auto& c : samples) {
        if (c.d != 2) throw InputError("angular counts need planar configurations");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double t = std::atan2(c.coords[2 * i + 1], c.coords[2 * i]) + std::numbers::pi;
            const int b = std::min(sectors - 1, static_cast<int>(t / (2.0 * std::numbers::pi) * sectors));
            ++counts[b];
        }
    }
    return counts;
}

}  // namespace rgl
