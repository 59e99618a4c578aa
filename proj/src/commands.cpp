#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numbers>

#include "rgl/experiment.hpp"
#include "rgl/fields.hpp"
#include "rgl/reference.hpp"
#include "rgl/sampler.hpp"
#include "run_io.hpp"

namespace rgl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// stream offsets of the analysis and free-energy seeds; chains use the
// sampler seed itself
constexpr std::uint64_t kTagStream = 0x100000;
constexpr std::uint64_t kFreeEnergyStream = 0x200000;

ojson kernel_json(const KernelSpec& k) {
    ojson j;
    j["d"] = k.d;
    if (k.is_log())
        j["s"] = "log";
    else
        j["s"] = k.s();
    return j;
}

ojson potential_json(const PotentialSpec& V) {
    ojson j;
    j["d"] = V.d;
    if (V.kind == PotentialSpec::Kind::Quadratic) {
        j["kind"] = "quadratic";
        j["a"] = V.a;
    } else {
        j["kind"] = "tabulated";
        j["lower"] = V.lower;
        j["h"] = V.h;
        j["n"] = V.n;
        j["values"] = V.values;
    }
    j["offset"] = V.offset;
    return j;
}

// NaN is stored as null so that traces survive a JSON round trip
std::vector<double> doubles_from(const nlohmann::json& a) {
    std::vector<double> v;
    v.reserve(a.size());
    for (const auto& x : a) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
    return v;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

std::vector<double> finite_only(const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v)
        if (std::isfinite(x)) out.push_back(x);
    return out;
}

double stderr_of(const std::vector<double>& v) { return v.size() >= 4 ? batch_means_stderr(v) : std::nan(""); }

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

ojson solver_json(const SolverOpts& o) {
    return {{"tolerance", o.tolerance},
            {"max_iterations", o.max_iterations},
            {"max_active_set_rounds", o.max_active_set_rounds},
            {"density_floor", o.density_floor}};
}

// Loads equilibrium.json when it was solved for the same problem, otherwise
// solves inline and (with `store`) saves the result.
std::shared_ptr<const EquilibriumMeasure> obtain_equilibrium(const ExperimentConfig& cfg, const fs::path& dir,
                                                             bool store = true) {
    const fs::path file = dir / "equilibrium.json";
    if (fs::exists(file)) {
        const std::string text = io::read_text(file);
        const auto j = nlohmann::json::parse(text, nullptr, false);
        if (!j.is_discarded() && j.contains("solver") && j["solver"] == nlohmann::json(solver_json(cfg.solver))) {
            auto mu = equilibrium_from_json(text);
            if (mu.kernel == cfg.kernel && mu.potential == cfg.potential && mu.grid == cfg.grid())
                return std::make_shared<const EquilibriumMeasure>(std::move(mu));
        }
    }
    auto mu = solve_equilibrium(cfg.potential, cfg.kernel, cfg.grid(), cfg.solver);
    if (store) {
        auto j = ojson::parse(equilibrium_to_json(mu));
        j["solver"] = solver_json(cfg.solver);
        io::write_text(file, j.dump(2) + "\n");
    }
    return std::make_shared<const EquilibriumMeasure>(std::move(mu));
}

GasModel model_for(const ExperimentConfig& cfg, std::shared_ptr<const EquilibriumMeasure> mu, int N, double beta) {
    return GasModel(cfg.kernel, cfg.potential, std::move(mu), N, beta);
}

std::vector<std::string> sample_header(int d) {
    std::vector<std::string> h{"run_id", "sweep", "idx"};
    for (int k = 1; k <= d; ++k) h.push_back("x" + std::to_string(k));
    return h;
}

void write_samples(const fs::path& file, const std::string& run_id, const std::vector<Configuration>& configs,
                   const std::vector<std::uint64_t>& sweeps) {
    const int d = configs.empty() ? 1 : configs.front().d;
    io::CsvWriter w(file, sample_header(d));
    for (std::size_t s = 0; s < configs.size(); ++s)
        for (std::size_t i = 0; i < configs[s].size(); ++i) {
            w.cell(run_id).cell(sweeps[s]).cell(static_cast<std::uint64_t>(i));
            for (double x : configs[s].point(i)) w.cell(x);
            w.end_row();
        }
    w.close();
}

struct Samples {
    std::vector<Configuration> configs;
    std::vector<std::uint64_t> sweeps;
};

Samples read_samples(const fs::path& file, int d, Scale scale) {
    const auto t = io::read_csv(file, sample_header(d));
    Samples out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = "samples.csv row " + std::to_string(r + 2);
        const auto sweep = io::parse_u64(row[1], where + " column 'sweep'");
        const auto idx = io::parse_u64(row[2], where + " column 'idx'");
        if (out.sweeps.empty() || out.sweeps.back() != sweep) {
            if (idx != 0) throw InputError(where + ": column 'idx' must restart at 0 for a new sweep");
            out.sweeps.push_back(sweep);
            out.configs.emplace_back(d, scale);
        } else if (idx != out.configs.back().size()) {
            throw InputError(where + ": column 'idx' out of sequence");
        }
        for (int k = 0; k < d; ++k)
            out.configs.back().coords.push_back(io::parse_double(row[3 + k], where + " column 'x" + std::to_string(k + 1) + "'"));
    }
    return out;
}

// W_N column of an energy trace, or NaN when the file is absent.
std::vector<double> read_w_trace(const fs::path& file) {
    if (!fs::exists(file)) return {};
    const auto t = io::read_csv(file, {"sweep", "H_N", "W_N", "acceptance"});
    std::vector<double> w;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        w.push_back(io::parse_double(t.rows[r][2], "energy_trace.csv row " + std::to_string(r + 2) + " column 'W_N'"));
    return w;
}

// Description of a sample directory as written by sample or reference.
struct SampleMeta {
    std::string source;
    Scale scale = Scale::Macro;
    int d = 1;
    int N = 0;
    std::vector<double> betas;
    bool ladder = false;
    double intensity = 1.0;
    Window window;
};

SampleMeta read_meta(const fs::path& dir) {
    const fs::path file = dir / "samples_meta.json";
    if (!fs::exists(file)) throw InputError(dir.string() + " holds no samples (run sample or reference first)");
    if (!fs::exists(dir / "manifest.json")) throw InputError(dir.string() + " is incomplete: manifest.json missing");
    const auto j = nlohmann::json::parse(io::read_text(file));
    SampleMeta m;
    m.source = j.at("source").get<std::string>();
    m.scale = j.at("scale").get<std::string>() == "micro" ? Scale::Micro : Scale::Macro;
    m.d = j.at("d").get<int>();
    m.N = j.at("N").get<int>();
    m.betas = j.at("betas").get<std::vector<double>>();
    m.ladder = j.at("ladder").get<bool>();
    if (m.scale == Scale::Micro) {
        m.intensity = j.at("intensity").get<double>();
        m.window = Window(j.at("window").at("center").get<std::vector<double>>(),
                          j.at("window").at("side").get<std::vector<double>>());
    }
    return m;
}

void write_meta(const fs::path& dir, const ExperimentConfig& cfg, const std::string& source, Scale scale,
                const Window* window, double intensity) {
    ojson j;
    j["source"] = source;
    j["scale"] = scale == Scale::Micro ? "micro" : "macro";
    j["d"] = cfg.kernel.d;
    j["N"] = scale == Scale::Micro ? 0 : cfg.N;
    j["betas"] = cfg.betas;
    j["ladder"] = cfg.ladder;
    j["run_id"] = cfg.run_id;
    j["config_hash"] = cfg.hash;
    if (window) {
        j["intensity"] = intensity;
        j["window"] = {{"center", window->center}, {"side", window->side}};
    }
    io::write_text(dir / "samples_meta.json", j.dump(2) + "\n");
}

fs::path rung_dir(const fs::path& dir, const SampleMeta& m, std::size_t k) {
    return m.ladder ? dir / ("rung_" + std::to_string(k)) : dir;
}

// ---- checkpoints ---------------------------------------------------------

ojson checkpoint_json(const ExperimentConfig& cfg, const ChainState& s, const SampleSet& set) {
    ojson j;
    j["config_hash"] = cfg.hash;
    j["points"] = s.config.coords;
    j["rng_state"] = s.rng.state();
    j["sweep"] = s.sweep;
    j["step_size"] = s.step_size;
    j["accepted"] = s.accepted;
    j["proposed"] = s.proposed;
    j["pair"] = s.pair;
    j["sum_v"] = s.sum_v;
    j["sum_x2"] = s.sum_x2;
    auto snaps = ojson::array();
    for (const auto& c : set.configs) snaps.push_back(c.coords);
    j["snapshots"] = snaps;
    j["snapshot_sweeps"] = set.sweep_indices;
    j["energy_trace"] = set.diagnostics.energy_trace;
    j["acceptance_trace"] = set.diagnostics.acceptance_trace;
    j["w_trace"] = set.diagnostics.w_trace;
    return j;
}

void restore_checkpoint(const nlohmann::json& j, const GasModel& m, ChainState& s, SampleSet& set) {
    const int d = m.kernel.d;
    s.config = Configuration(d, Scale::Macro, j.at("points").get<std::vector<double>>());
    if (static_cast<int>(s.config.size()) != m.N) throw InputError("checkpoint.json: points do not match model.N");
    s.rng.restore(j.at("rng_state").get<std::string>());
    s.sweep = j.at("sweep").get<std::uint64_t>();
    s.step_size = j.at("step_size").get<double>();
    s.accepted = j.at("accepted").get<std::uint64_t>();
    s.proposed = j.at("proposed").get<std::uint64_t>();
    s.pair = j.at("pair").get<double>();
    s.sum_v = j.at("sum_v").get<double>();
    s.sum_x2 = j.at("sum_x2").get<double>();
    for (const auto& c : j.at("snapshots")) set.configs.emplace_back(d, Scale::Macro, c.get<std::vector<double>>());
    set.sweep_indices = j.at("snapshot_sweeps").get<std::vector<std::uint64_t>>();
    set.diagnostics.energy_trace = doubles_from(j.at("energy_trace"));
    set.diagnostics.acceptance_trace = doubles_from(j.at("acceptance_trace"));
    set.diagnostics.w_trace = doubles_from(j.at("w_trace"));
}

// ---- sample outputs -------------------------------------------------------

void write_chain_outputs(const fs::path& dir, const ExperimentConfig& cfg, const SampleSet& set) {
    fs::create_directories(dir);
    write_samples(dir / "samples.csv", cfg.run_id, set.configs, set.sweep_indices);
    const auto& dg = set.diagnostics;
    io::CsvWriter w(dir / "energy_trace.csv", {"sweep", "H_N", "W_N", "acceptance"});
    for (std::size_t i = 0; i < dg.energy_trace.size(); ++i)
        w.cell(cfg.n_burn + 1 + i)
            .cell(dg.energy_trace[i])
            .cell(i < dg.w_trace.size() ? dg.w_trace[i] : std::nan(""))
            .cell(dg.acceptance_trace[i])
            .end_row();
    w.close();
    const auto wf = finite_only(dg.w_trace);
    ojson j;
    j["beta"] = set.model.beta;
    j["effective_beta"] = set.model.effective_beta();
    j["N"] = set.model.N;
    j["n_burn"] = cfg.n_burn;
    j["n_sweeps"] = cfg.n_sweeps;
    j["thin"] = cfg.thin;
    j["snapshots"] = set.configs.size();
    j["acceptance_rate"] = dg.acceptance_rate;
    j["step_size"] = dg.step_size;
    j["tau"] = dg.tau;
    j["tau_within_budget"] = dg.tau <= static_cast<double>(cfg.n_sweeps) / 50.0;
    j["H_mean"] = mean_of(dg.energy_trace);
    j["H_stderr"] = stderr_of(dg.energy_trace);
    j["W_mean"] = mean_of(wf);
    j["W_stderr"] = stderr_of(wf);
    j["W_undefined_sweeps"] = dg.w_trace.size() - wf.size();
    io::write_text(dir / "diagnostics.json", j.dump(2) + "\n");
}

// ---- analysis helpers ------------------------------------------------------

EmpiricalField build_field(const ExperimentConfig& cfg, const SampleMeta& meta, const Samples& s, const GasModel* m) {
    EmpiricalField f;
    for (std::size_t k = 0; k < s.configs.size(); ++k) {
        const auto seed = derive_seed(cfg.seed, kTagStream + k);
        auto part = meta.scale == Scale::Micro
                        ? field_from_micro(s.configs[k], meta.window, meta.intensity, cfg.n_tags, cfg.R_w, seed)
                        : empirical_field(s.configs[k], *m, cfg.n_tags, cfg.R_w, seed);
        if (k == 0)
            f = std::move(part);
        else
            f.append(part);
    }
    return f;
}

// Unit-mean bulk gaps. Microscopic samples have varying sizes and are
// unfolded one at a time.
std::vector<double> spacing_gaps(const ExperimentConfig& cfg, const SampleMeta& meta, const Samples& s) {
    if (meta.scale == Scale::Macro)
        return spacing_histogram(s.configs, cfg.bulk_fraction, cfg.spacing_bins, cfg.max_gap).gaps;
    std::vector<double> gaps;
    for (const auto& c : s.configs) {
        const auto g = spacing_histogram({c}, cfg.bulk_fraction, cfg.spacing_bins, cfg.max_gap).gaps;
        gaps.insert(gaps.end(), g.begin(), g.end());
    }
    return gaps;
}

struct WStat {
    double mean = std::nan("");
    double stderr_ = std::nan("");
};

WStat next_order_stats(const SampleMeta& meta, const fs::path& rdir, const Samples& s, const GasModel* m) {
    if (meta.scale == Scale::Micro) return {};
    auto trace = read_w_trace(rdir / "energy_trace.csv");
    if (trace.empty() && m)
        for (const auto& c : s.configs) trace.push_back(next_order_energy(hamiltonian(c, *m), c, *m));
    const auto f = finite_only(trace);
    return {mean_of(f), stderr_of(f)};
}

double support_radius(const EquilibriumMeasure& mu) {
    double r = 0.0;
    std::vector<double> x(mu.grid.d);
    for (std::size_t i = 0; i < mu.grid.cell_count(); ++i) {
        if (!mu.support_mask[i]) continue;
        mu.grid.center(i, x);
        r = std::max(r, std::hypot(x[0], x[1]));
    }
    return r;
}

std::vector<double> radial_edges(const EquilibriumMeasure& mu, int bins) {
    // equal-area annuli over the inner 80% of the support
    const double r = 0.8 * support_radius(mu);
    std::vector<double> e;
    for (int k = 0; k <= bins; ++k) e.push_back(r * std::sqrt(static_cast<double>(k) / bins));
    return e;
}

// N times the average density of mu over each annulus, from cell centres.
std::vector<double> radial_reference(const EquilibriumMeasure& mu, const std::vector<double>& edges, int N) {
    std::vector<double> mass(edges.size() - 1, 0.0), area(edges.size() - 1, 0.0);
    std::vector<double> x(2);
    for (std::size_t i = 0; i < mu.grid.cell_count(); ++i) {
        mu.grid.center(i, x);
        const double r = std::hypot(x[0], x[1]);
        const auto it = std::upper_bound(edges.begin(), edges.end(), r);
        if (it == edges.begin() || it == edges.end()) continue;
        const auto b = static_cast<std::size_t>(it - edges.begin() - 1);
        mass[b] += mu.density[i] * mu.grid.cell_volume();
        area[b] += mu.grid.cell_volume();
    }
    std::vector<double> out;
    for (std::size_t b = 0; b < mass.size(); ++b) out.push_back(area[b] > 0.0 ? N * mass[b] / area[b] : std::nan(""));
    return out;
}

}  // namespace

// ---- equilibrium serialization ---------------------------------------------

std::string equilibrium_to_json(const EquilibriumMeasure& mu) {
    ojson j;
    j["kernel"] = kernel_json(mu.kernel);
    j["potential"] = potential_json(mu.potential);
    j["grid"] = {{"d", mu.grid.d}, {"lower", mu.grid.lower}, {"h", mu.grid.h}, {"n", mu.grid.n}};
    j["energy_I"] = mu.energy_I;
    j["frostman_c"] = mu.frostman_c;
    j["sigma_volume"] = mu.sigma_volume;
    j["mass"] = mu.mass();
    j["density_floor"] = mu.density_floor;
    j["iterations"] = mu.iterations;
    j["residuals"] = {{"max_negative_violation", mu.residuals.max_negative_violation},
                      {"max_on_support", mu.residuals.max_on_support}};
    j["density"] = mu.density;
    j["zeta"] = mu.zeta;
    j["support_mask"] = mu.support_mask;
    return j.dump(2) + "\n";
}

EquilibriumMeasure equilibrium_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        EquilibriumMeasure mu;
        const auto& k = j.at("kernel");
        const int d = k.at("d").get<int>();
        mu.kernel = k.at("s").is_string() ? KernelSpec::logarithmic(d) : KernelSpec::riesz(d, k.at("s").get<double>());
        const auto& p = j.at("potential");
        if (p.at("kind").get<std::string>() == "quadratic") {
            mu.potential = PotentialSpec::quadratic(d, p.at("a").get<double>());
        } else {
            mu.potential = PotentialSpec::tabulated(d, p.at("lower").get<std::vector<double>>(), p.at("h").get<double>(),
                                                    p.at("n").get<std::vector<int>>(), p.at("values").get<std::vector<double>>());
        }
        mu.potential.offset = p.at("offset").get<double>();
        const auto& g = j.at("grid");
        mu.grid.d = g.at("d").get<int>();
        mu.grid.lower = g.at("lower").get<std::vector<double>>();
        mu.grid.h = g.at("h").get<double>();
        mu.grid.n = g.at("n").get<std::vector<int>>();
        mu.grid.validate();
        mu.energy_I = j.at("energy_I").get<double>();
        mu.frostman_c = j.at("frostman_c").get<double>();
        mu.sigma_volume = j.at("sigma_volume").get<double>();
        mu.density_floor = j.at("density_floor").get<double>();
        mu.iterations = j.at("iterations").get<int>();
        mu.residuals.max_negative_violation = j.at("residuals").at("max_negative_violation").get<double>();
        mu.residuals.max_on_support = j.at("residuals").at("max_on_support").get<double>();
        mu.density = j.at("density").get<std::vector<double>>();
        mu.zeta = j.at("zeta").get<std::vector<double>>();
        mu.support_mask = j.at("support_mask").get<std::vector<std::uint8_t>>();
        if (mu.density.size() != mu.grid.cell_count() || mu.zeta.size() != mu.grid.cell_count() ||
            mu.support_mask.size() != mu.grid.cell_count())
            throw InputError("equilibrium.json: array sizes do not match the grid");
        return mu;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("equilibrium.json: ") + e.what());
    }
}

fs::path run_directory(const ExperimentConfig& cfg, const RunOptions& opts) {
    return (opts.out.empty() ? fs::path(cfg.directory) : opts.out) / cfg.run_id;
}

// ---- commands ---------------------------------------------------------------

void cmd_equilibrium(const ExperimentConfig& cfg, const RunOptions& opts) {
    Clock clock;
    const fs::path dir = run_directory(cfg, opts);
    io::begin_run(dir, cfg.canonical);
    const std::vector<std::string> header{"max_negative_violation", "max_on_support", "tolerance", "energy_I",
                                          "frostman_c",             "sigma_volume",   "mass",      "iterations",
                                          "certified"};
    EquilibriumMeasure mu;
    try {
        mu = solve_equilibrium(cfg.potential, cfg.kernel, cfg.grid(), cfg.solver);
    } catch (const ConvergenceError& e) {
        io::CsvWriter w(dir / "frostman_report.csv", header);
        const double nan = std::nan("");
        w.cell(nan).cell(e.residual()).cell(cfg.solver.tolerance).cell(nan).cell(nan).cell(nan).cell(nan).cell(0).cell(0);
        w.end_row();
        w.close();
        throw;
    }
    auto j = ojson::parse(equilibrium_to_json(mu));
    j["solver"] = solver_json(cfg.solver);
    io::write_text(dir / "equilibrium.json", j.dump(2) + "\n");
    io::CsvWriter w(dir / "frostman_report.csv", header);
    const bool ok = mu.residuals.max_negative_violation <= cfg.solver.tolerance &&
                    mu.residuals.max_on_support <= cfg.solver.tolerance && std::abs(mu.mass() - 1.0) <= 1e-8;
    w.cell(mu.residuals.max_negative_violation)
        .cell(mu.residuals.max_on_support)
        .cell(cfg.solver.tolerance)
        .cell(mu.energy_I)
        .cell(mu.frostman_c)
        .cell(mu.sigma_volume)
        .cell(mu.mass())
        .cell(mu.iterations)
        .cell(ok ? 1 : 0)
        .end_row();
    w.close();
    io::write_manifest(dir, "equilibrium", cfg.hash, cfg.seed, clock.seconds());
}

bool cmd_sample(const ExperimentConfig& cfg, const RunOptions& opts) {
    Clock clock;
    const fs::path dir = run_directory(cfg, opts);
    const fs::path ckpt = dir / "checkpoint.json";
    if (cfg.ladder && (opts.stop_after || opts.resume))
        throw ParameterError("checkpointing is supported for single chains only");
    nlohmann::json saved;
    if (opts.resume) {
        if (!fs::exists(ckpt)) throw InputError("no checkpoint.json in " + dir.string());
        saved = nlohmann::json::parse(io::read_text(ckpt));
        if (saved.at("config_hash").get<std::string>() != cfg.hash)
            throw InputError("checkpoint was written for a different configuration (config hash differs); refusing to resume");
    }
    io::begin_run(dir, cfg.canonical);
    auto mu = obtain_equilibrium(cfg, dir);
    ChainPlan plan{cfg.n_burn, cfg.n_sweeps, cfg.thin, 1.0, true};

    if (!cfg.ladder) {
        const GasModel m = model_for(cfg, mu, cfg.N, cfg.betas[0]);
        ChainState state;
        SampleSet set;
        set.model = m;
        if (opts.resume)
            restore_checkpoint(saved, m, state, set);
        else
            state = init_chain(m, cfg.seed);
        if (!advance_chain(state, m, plan, set, opts.stop_after)) {
            io::write_text(ckpt, checkpoint_json(cfg, state, set).dump() + "\n");
            return false;
        }
        finalize(set, state);
        write_chain_outputs(dir, cfg, set);
        fs::remove(ckpt);
    } else {
        std::vector<GasModel> ladder;
        for (double b : cfg.betas) ladder.push_back(model_for(cfg, mu, cfg.N, b));
        const auto res = parallel_tempering(ladder, TemperingSchedule{plan, cfg.swap_interval, opts.workers}, cfg.seed);
        io::CsvWriter w(dir / "ladder.csv", {"rung", "beta", "swap_acceptance"});
        for (std::size_t k = 0; k < res.rungs.size(); ++k) {
            write_chain_outputs(dir / ("rung_" + std::to_string(k)), cfg, res.rungs[k]);
            w.cell(static_cast<std::uint64_t>(k))
                .cell(cfg.betas[k])
                .cell(k < res.swap_acceptance.size() ? res.swap_acceptance[k] : std::nan(""))
                .end_row();
        }
        w.close();
    }
    write_meta(dir, cfg, "metropolis", Scale::Macro, nullptr, 0.0);
    io::write_manifest(dir, "sample", cfg.hash, cfg.seed, clock.seconds());
    return true;
}

void cmd_reference(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (!cfg.reference) throw ConfigError("reference", "missing required key");
    Clock clock;
    const auto& r = *cfg.reference;
    const fs::path dir = run_directory(cfg, opts);
    io::begin_run(dir, cfg.canonical);
    Samples s;
    const int d = cfg.kernel.d;
    const Window window(std::vector<double>(d, 0.0), std::vector<double>(d, r.side));
    for (int t = 0; t < r.n_samples; ++t) {
        const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t) + 1);
        if (r.kind == "poisson")
            s.configs.push_back(sample_poisson(r.intensity, window, seed));
        else if (r.kind == "lattice")
            s.configs.push_back(lattice_config(lattice_kind_from_string(r.lattice), r.intensity, window));
        else if (r.kind == "tridiagonal")
            s.configs.push_back(sample_beta_hermite(cfg.N, cfg.betas[0], seed, cfg.potential.a));
        else
            s.configs.push_back(sample_ginibre(cfg.N, seed));
        s.sweeps.push_back(static_cast<std::uint64_t>(t));
    }
    write_samples(dir / "samples.csv", cfg.run_id, s.configs, s.sweeps);
    const bool micro = r.kind == "poisson" || r.kind == "lattice";
    write_meta(dir, cfg, r.kind, micro ? Scale::Micro : Scale::Macro, micro ? &window : nullptr, r.intensity);
    io::write_manifest(dir, "reference", cfg.hash, cfg.seed, clock.seconds());
}

void cmd_analyze(const ExperimentConfig& cfg, const RunOptions& opts) {
    Clock clock;
    const fs::path dir = run_directory(cfg, opts);
    const SampleMeta meta = read_meta(dir);
    if (meta.d != cfg.kernel.d) throw InputError("samples have dimension " + std::to_string(meta.d) + ", kernel.d is " +
                                                 std::to_string(cfg.kernel.d));
    if (meta.scale == Scale::Macro && meta.N != cfg.N)
        throw InputError("samples have N = " + std::to_string(meta.N) + ", model.N is " + std::to_string(cfg.N));
    io::begin_run(dir, cfg.canonical);
    std::shared_ptr<const EquilibriumMeasure> mu;
    if (meta.scale == Scale::Macro) mu = obtain_equilibrium(cfg, dir);
    const int d = meta.d;

    std::vector<double> r_edges;
    for (int k = 0; k <= cfg.r_bins; ++k) r_edges.push_back(cfg.r_max * k / cfg.r_bins);

    io::CsvWriter sp(dir / "spacing.csv", {"beta", "bin_lo", "bin_hi", "density", "count"});
    io::CsvWriter nv(dir / "number_variance.csv", {"beta", "R", "variance", "std_error", "mean_discrepancy", "variance_per_volume"});
    io::CsvWriter pc(dir / "pair_correlation.csv", {"beta", "r_lo", "r_hi", "g"});
    io::CsvWriter en(dir / "entropy.csv",
                     {"beta", "cell", "unit_reference", "matched_reference", "intensity", "cells", "poisson_baseline"});
    io::CsvWriter rf(dir / "rate_function.csv", {"beta", "W_mean", "W_stderr", "entropy", "sigma_volume", "rate"});
    io::CsvWriter em(dir / "empirical_measure_distance.csv", {"beta", "sweep", "w1"});
    std::optional<io::CsvWriter> rd;
    if (d == 2 && mu) rd.emplace(dir / "radial_density.csv", std::vector<std::string>{"beta", "r_lo", "r_hi", "density", "mu_density"});

    for (std::size_t k = 0; k < meta.betas.size(); ++k) {
        const double beta = meta.betas[k];
        const fs::path rdir = rung_dir(dir, meta, k);
        const Samples s = read_samples(rdir / "samples.csv", d, meta.scale);
        if (s.configs.empty()) throw InputError((rdir / "samples.csv").string() + " has no snapshots");
        std::optional<GasModel> m;
        if (mu) m = model_for(cfg, mu, cfg.N, beta);

        if (d == 1) {
            const auto gaps = spacing_gaps(cfg, meta, s);
            const auto h = make_histogram(gaps, 0.0, cfg.max_gap, cfg.spacing_bins);
            for (int b = 0; b < cfg.spacing_bins; ++b)
                sp.cell(beta).cell(h.edges[b]).cell(h.edges[b + 1]).cell(h.density[b]).cell(static_cast<std::uint64_t>(h.counts[b])).end_row();
        }

        const EmpiricalField f = build_field(cfg, meta, s, m ? &*m : nullptr);
        for (const auto& v : number_variance_curve(f, cfg.R_list))
            nv.cell(beta).cell(v.R).cell(v.variance).cell(v.std_error).cell(v.mean).cell(v.variance / std::pow(v.R, d)).end_row();
        for (const auto& row : pair_correlation(f, r_edges)) pc.cell(beta).cell(row.r_lo).cell(row.r_hi).cell(row.g).end_row();

        const auto ent = entropy_rate_estimate(f, cfg.cell);
        // a Poisson process of the same intensity scores 1 - m + m log m
        const double base = 1.0 - ent.intensity + ent.intensity * std::log(ent.intensity);
        en.cell(beta).cell(cfg.cell).cell(ent.unit_reference).cell(ent.matched_reference).cell(ent.intensity)
            .cell(static_cast<std::uint64_t>(ent.cells)).cell(base).end_row();

        const WStat w = next_order_stats(meta, rdir, s, m ? &*m : nullptr);
        const double sigma = mu ? mu->sigma_volume : std::nan("");
        const double rate = std::isfinite(w.mean) && std::isfinite(sigma)
                                ? rate_function_estimate(w.mean, ent.unit_reference, beta, sigma)
                                : std::nan("");
        rf.cell(beta).cell(w.mean).cell(w.stderr_).cell(ent.unit_reference).cell(sigma).cell(rate).end_row();

        if (d == 1 && mu)
            for (std::size_t i = 0; i < s.configs.size(); ++i)
                em.cell(beta).cell(s.sweeps[i]).cell(wasserstein1_to_measure(s.configs[i].coords, *mu)).end_row();
        if (rd) {
            const auto edges = radial_edges(*mu, cfg.radial_bins);
            const auto rho = radial_density(s.configs, edges);
            const auto ref = radial_reference(*mu, edges, cfg.N);
            for (std::size_t b = 0; b < rho.size(); ++b) rd->cell(beta).cell(edges[b]).cell(edges[b + 1]).cell(rho[b]).cell(ref[b]).end_row();
        }
    }
    for (auto* w : {&sp, &nv, &pc, &en, &rf, &em}) w->close();
    if (rd) rd->close();
    io::write_manifest(dir, "analyze", cfg.hash, cfg.seed, clock.seconds());
}

void cmd_free_energy(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (!cfg.free_energy) throw ConfigError("free_energy", "missing required key");
    if (cfg.ladder) throw ConfigError("model.beta", "free energy runs take a single beta");
    Clock clock;
    const auto& fe = *cfg.free_energy;
    const fs::path dir = run_directory(cfg, opts);
    io::begin_run(dir, cfg.canonical);
    auto mu = obtain_equilibrium(cfg, dir);
    const double beta = cfg.betas[0];
    const bool closed_form = cfg.kernel.d == 1 && cfg.kernel.is_log() &&
                             cfg.potential.kind == PotentialSpec::Kind::Quadratic && cfg.potential.offset == 0.0;

    io::CsvWriter lz(dir / "logZ.csv",
                     {"N", "beta", "estimate", "stderr", "logZ_ref", "logZ_exact", "logZ_exact_stderr", "n_lambdas"});
    io::CsvWriter ig(dir / "integrand.csv", {"N", "lambda", "mean", "stderr", "tau"});
    io::CsvWriter ex(dir / "expansion.csv", {"N", "a_N", "a_N_stderr", "difference", "a_N_exact", "energy_I"});
    double prev = std::nan("");
    for (int N : fe.N_list) {
        const GasModel m = model_for(cfg, mu, N, beta);
        const auto est = thermo_integrate_logZ(m, fe.lambdas, FreeEnergyPlan{fe.n_burn, fe.n_sweeps, opts.workers},
                                               derive_seed(cfg.seed, kFreeEnergyStream + static_cast<std::uint64_t>(N)));
        double exact = std::nan(""), exact_se = std::nan("");
        if (closed_form) {
            exact = beta_hermite_log_partition(N, beta, cfg.potential.a);
            exact_se = 0.0;
        } else if (N <= 2) {
            const auto o = exact_logZ_small_N(m, fe.oracle_budget, derive_seed(cfg.seed, kFreeEnergyStream));
            exact = o.log_z;
            exact_se = o.std_error;
        }
        lz.cell(N).cell(beta).cell(est.log_z).cell(est.std_error).cell(est.log_z_ref).cell(exact).cell(exact_se)
            .cell(static_cast<std::uint64_t>(est.lambdas.size())).end_row();
        for (std::size_t i = 0; i < est.lambdas.size(); ++i)
            ig.cell(N).cell(est.lambdas[i]).cell(est.means[i]).cell(est.std_errors[i]).cell(est.taus[i]).end_row();
        // a_N = (log Z + f N^2 I) / N minus the (beta / 2d) log N term of log kernels
        const double f = m.gibbs_factor();
        const double lg = cfg.kernel.is_log() ? beta / (2.0 * cfg.kernel.d) * std::log(static_cast<double>(N)) : 0.0;
        const auto a_of = [&](double lz_) { return (lz_ + f * N * static_cast<double>(N) * mu->energy_I) / N - lg; };
        const double a = a_of(est.log_z);
        ex.cell(N).cell(a).cell(est.std_error / N).cell(std::isfinite(prev) ? std::abs(a - prev) : std::nan(""))
            .cell(std::isfinite(exact) ? a_of(exact) : std::nan("")).cell(mu->energy_I).end_row();
        prev = a;
    }
    lz.close();
    ig.close();
    ex.close();
    io::write_manifest(dir, "free-energy", cfg.hash, cfg.seed, clock.seconds());
}

void cmd_compare(const ExperimentConfig& a, const ExperimentConfig& b, const RunOptions& opts) {
    Clock clock;
    const fs::path da = run_directory(a, opts), db = run_directory(b, opts);
    const SampleMeta ma = read_meta(da), mb = read_meta(db);
    if (ma.d != mb.d) throw InputError("incompatible dimensions: " + std::to_string(ma.d) + " and " + std::to_string(mb.d));
    if (ma.betas.size() != mb.betas.size()) throw InputError("runs have different numbers of rungs");
    const fs::path out = da.parent_path() / ("compare_" + a.run_id + "_" + b.run_id);
    io::begin_run(out, a.canonical);
    io::write_text(out / "config_b.json", b.canonical);
    std::shared_ptr<const EquilibriumMeasure> mua, mub;
    if (ma.scale == Scale::Macro) mua = obtain_equilibrium(a, da, false);
    if (mb.scale == Scale::Macro) mub = obtain_equilibrium(b, db, false);
    const TestFunctionFamily T = TestFunctionFamily::make(ma.d, std::min(a.R_w, b.R_w));

    io::CsvWriter cm(out / "comparison.csv", {"rung", "beta_a", "beta_b", "metric", "value"});
    io::CsvWriter wt(out / "w_table.csv", {"run", "rung", "beta", "W_mean", "W_stderr"});
    for (std::size_t k = 0; k < ma.betas.size(); ++k) {
        const fs::path ra = rung_dir(da, ma, k), rb = rung_dir(db, mb, k);
        const Samples sa = read_samples(ra / "samples.csv", ma.d, ma.scale);
        const Samples sb = read_samples(rb / "samples.csv", mb.d, mb.scale);
        std::optional<GasModel> ga, gb;
        if (mua) ga = model_for(a, mua, a.N, ma.betas[k]);
        if (mub) gb = model_for(b, mub, b.N, mb.betas[k]);
        const auto row = [&](const std::string& metric, double v) {
            cm.cell(static_cast<std::uint64_t>(k)).cell(ma.betas[k]).cell(mb.betas[k]).cell(metric).cell(v).end_row();
        };
        if (ma.d == 1) row("ks_spacing", ks_two_sample(spacing_gaps(a, ma, sa), spacing_gaps(b, mb, sb)));
        const auto fa = build_field(a, ma, sa, ga ? &*ga : nullptr);
        const auto fb = build_field(b, mb, sb, gb ? &*gb : nullptr);
        row("field_distance", field_distance(fa, fb, T));
        const WStat wa = next_order_stats(ma, ra, sa, ga ? &*ga : nullptr);
        const WStat wb = next_order_stats(mb, rb, sb, gb ? &*gb : nullptr);
        wt.cell(a.run_id).cell(static_cast<std::uint64_t>(k)).cell(ma.betas[k]).cell(wa.mean).cell(wa.stderr_).end_row();
        wt.cell(b.run_id).cell(static_cast<std::uint64_t>(k)).cell(mb.betas[k]).cell(wb.mean).cell(wb.stderr_).end_row();
        const double diff = wa.mean - wb.mean;
        row("w_mean_difference", diff);
        const double se = std::hypot(std::isfinite(wa.stderr_) ? wa.stderr_ : 0.0, std::isfinite(wb.stderr_) ? wb.stderr_ : 0.0);
        row("w_difference_sigma", diff == 0.0 ? 0.0 : std::abs(diff) / se);
        if (ma.d == 2 && mua && mub) {
            const auto edges = radial_edges(*mua, a.radial_bins);
            const auto rha = radial_density(sa.configs, edges), rhb = radial_density(sb.configs, edges);
            double worst = 0.0;
            for (std::size_t i = 0; i < rha.size(); ++i) worst = std::max(worst, std::abs(rha[i] / rhb[i] - 1.0));
            row("radial_max_relative_difference", worst);
            row("angular_chi2_p_a", chi2_uniform_pvalue(angular_counts(sa.configs, 16)));
            row("angular_chi2_p_b", chi2_uniform_pvalue(angular_counts(sb.configs, 16)));
        }
    }
    cm.close();
    wt.close();
    io::write_manifest(out, "compare", sha256_hex(a.hash + b.hash), a.seed, clock.seconds());
}

}  // namespace rgl
