#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "rgl/experiment.hpp"
#include "rgl/reference.hpp"

namespace rgl {

namespace {

using nlohmann::json;

// A JSON object being read; remembers the keys consumed so that leftovers
// can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a table");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "missing required key");
        return j_.at(key);
    }

    Section section(const std::string& key) { return Section(raw(key), at(key)); }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key) {
        const double v = number(key);
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(at(key), "must be positive");
        return v;
    }
    double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

    std::int64_t integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }
    std::uint64_t count(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_unsigned()) throw ConfigError(at(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::uint64_t count(const std::string& key, std::uint64_t fallback) { return has(key) ? count(key) : fallback; }
    int positive_int(const std::string& key) {
        const auto v = integer(key);
        if (v < 1 || v > (1LL << 30)) throw ConfigError(at(key), "must be a positive integer");
        return static_cast<int>(v);
    }
    int positive_int(const std::string& key, int fallback) { return has(key) ? positive_int(key) : fallback; }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a non-empty array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(at(key), "expected a non-empty array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    std::vector<int> positive_ints(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a non-empty array of integers");
        std::vector<int> out;
        for (const auto& x : v) {
            if (!x.is_number_integer() || x.get<std::int64_t>() < 1 || x.get<std::int64_t>() > (1 << 20))
                throw ConfigError(at(key), "expected positive integers");
            out.push_back(x.get<int>());
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

bool valid_run_id(const std::string& s) {
    if (s.empty() || s.size() > 128 || s == "." || s == "..") return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) return false;
    return true;
}

void parse_kernel(Section s, ExperimentConfig& cfg) {
    const auto d = s.integer("d");
    if (d != 1 && d != 2 && d != 3) throw ConfigError(s.at("d"), "dimension must be 1, 2 or 3");
    const json& e = s.raw("s");
    try {
        if (e.is_string()) {
            if (e.get<std::string>() != "log") throw ConfigError(s.at("s"), "expected \"log\" or a number");
            cfg.kernel = KernelSpec::logarithmic(static_cast<int>(d));
        } else if (e.is_number()) {
            cfg.kernel = KernelSpec::riesz(static_cast<int>(d), e.get<double>());
        } else {
            throw ConfigError(s.at("s"), "expected \"log\" or a number");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ConfigError(s.at("s"), err.what());
    }
    s.finish();
}

void parse_potential(Section s, ExperimentConfig& cfg) {
    const int d = cfg.kernel.d;
    const std::string kind = s.string("kind");
    if (kind == "quadratic") {
        cfg.potential = PotentialSpec::quadratic(d, s.positive("a"));
        cfg.potential.offset = s.number("offset", 0.0);
    } else if (kind == "tabulated") {
        const auto lower = s.numbers("lower");
        const double h = s.positive("h");
        const auto n = s.positive_ints("n");
        const auto values = s.numbers("values");
        try {
            cfg.potential = PotentialSpec::tabulated(d, lower, h, n, values);
        } catch (const Error& err) {
            throw ConfigError(s.at("values"), err.what());
        }
    } else {
        throw ConfigError(s.at("kind"), "expected \"quadratic\" or \"tabulated\"");
    }
    s.finish();
}

void parse_solver(Section s, ExperimentConfig& cfg) {
    cfg.solver.tolerance = s.positive("tolerance", cfg.solver.tolerance);
    cfg.solver.max_iterations = s.positive_int("max_iterations", cfg.solver.max_iterations);
    cfg.solver.max_active_set_rounds = s.positive_int("max_active_set_rounds", cfg.solver.max_active_set_rounds);
    cfg.solver.density_floor = s.positive("density_floor", cfg.solver.density_floor);
    s.finish();
}

void parse_model(Section s, ExperimentConfig& cfg) {
    cfg.N = s.positive_int("N");
    const bool single = s.has("beta"), ladder = s.has("beta_ladder");
    if (single == ladder) throw ConfigError(s.at("beta"), "give exactly one of beta and beta_ladder");
    cfg.ladder = ladder;
    cfg.betas = ladder ? s.numbers("beta_ladder") : std::vector<double>{s.positive("beta")};
    for (std::size_t k = 0; k < cfg.betas.size(); ++k) {
        if (!(cfg.betas[k] > 0.0) || !std::isfinite(cfg.betas[k]))
            throw ConfigError(s.at("beta_ladder"), "inverse temperatures must be positive");
        if (k > 0 && cfg.betas[k] < cfg.betas[k - 1]) throw ConfigError(s.at("beta_ladder"), "ladder must be non-decreasing");
    }
    s.finish();
}

void parse_sampler(Section s, ExperimentConfig& cfg, std::optional<std::uint64_t> seed_override) {
    cfg.n_burn = s.count("n_burn");
    cfg.n_sweeps = s.count("n_sweeps");
    if (cfg.n_sweeps == 0) throw ConfigError(s.at("n_sweeps"), "must be positive");
    cfg.thin = s.count("thin");
    cfg.seed = s.count("seed");
    if (seed_override) cfg.seed = *seed_override;
    cfg.swap_interval = s.count("swap_interval", 1);
    if (cfg.swap_interval == 0) throw ConfigError(s.at("swap_interval"), "must be positive");
    s.finish();
}

void parse_analysis(Section s, ExperimentConfig& cfg) {
    cfg.n_tags = s.positive_int("n_tags");
    cfg.R_w = s.positive("R_w");
    if (cfg.R_w < 1.0) throw ConfigError(s.at("R_w"), "must be at least 1");
    cfg.R_list = s.numbers("R_list");
    for (double R : cfg.R_list)
        if (!(R > 0.0) || R > 2.0 * cfg.R_w) throw ConfigError(s.at("R_list"), "sizes must lie in (0, 2 R_w]");
    cfg.cell = s.positive("cell");
    const double ratio = 2.0 * cfg.R_w / cfg.cell;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) throw ConfigError(s.at("cell"), "must divide 2 R_w");
    cfg.bulk_fraction = s.positive("bulk_fraction");
    if (cfg.bulk_fraction > 1.0) throw ConfigError(s.at("bulk_fraction"), "must lie in (0, 1]");
    cfg.spacing_bins = s.positive_int("spacing_bins", cfg.spacing_bins);
    cfg.max_gap = s.positive("max_gap", cfg.max_gap);
    cfg.r_max = s.positive("r_max", 0.5 * cfg.R_w);
    if (cfg.r_max > cfg.R_w) throw ConfigError(s.at("r_max"), "must not exceed R_w");
    cfg.r_bins = s.positive_int("r_bins", cfg.r_bins);
    cfg.radial_bins = s.positive_int("radial_bins", cfg.radial_bins);
    s.finish();
}

void parse_output(Section s, ExperimentConfig& cfg) {
    cfg.directory = s.string("directory");
    if (cfg.directory.empty()) throw ConfigError(s.at("directory"), "must not be empty");
    cfg.run_id = s.string("run_id");
    if (!valid_run_id(cfg.run_id)) throw ConfigError(s.at("run_id"), "use letters, digits, '_', '-' and '.'");
    s.finish();
}

void parse_free_energy(Section s, ExperimentConfig& cfg) {
    FreeEnergyConfig fe;
    fe.N_list = s.positive_ints("N_list");
    if (s.has("lambdas") == s.has("n_lambdas")) throw ConfigError(s.at("lambdas"), "give exactly one of lambdas and n_lambdas");
    if (s.has("lambdas")) {
        fe.lambdas = s.numbers("lambdas");
    } else {
        const int n = s.positive_int("n_lambdas");
        if (n < 2) throw ConfigError(s.at("n_lambdas"), "need at least two points");
        // denser near lambda = 0 where the integrand varies fastest
        const double p = s.positive("lambda_power", 1.0);
        for (int i = 0; i < n; ++i) fe.lambdas.push_back(std::pow(static_cast<double>(i) / (n - 1), p));
    }
    if (fe.lambdas.size() < 2 || fe.lambdas.front() != 0.0 || fe.lambdas.back() != 1.0)
        throw ConfigError(s.at("lambdas"), "must run from 0 to 1");
    for (std::size_t i = 1; i < fe.lambdas.size(); ++i)
        if (!(fe.lambdas[i] > fe.lambdas[i - 1])) throw ConfigError(s.at("lambdas"), "must be increasing");
    fe.n_burn = s.count("n_burn");
    fe.n_sweeps = s.count("n_sweeps");
    if (fe.n_sweeps == 0) throw ConfigError(s.at("n_sweeps"), "must be positive");
    fe.oracle_budget = s.count("oracle_budget", fe.oracle_budget);
    s.finish();
    cfg.free_energy = fe;
}

void parse_reference(Section s, ExperimentConfig& cfg) {
    ReferenceConfig r;
    r.kind = s.string("kind");
    if (r.kind != "poisson" && r.kind != "tridiagonal" && r.kind != "ginibre" && r.kind != "lattice")
        throw ConfigError(s.at("kind"), "expected poisson, tridiagonal, ginibre or lattice");
    r.n_samples = s.positive_int("n_samples");
    const bool micro = r.kind == "poisson" || r.kind == "lattice";
    if (micro) {
        r.intensity = s.positive("intensity");
        r.side = s.positive("side");
        if (r.side <= 2.0 * cfg.R_w) throw ConfigError(s.at("side"), "must exceed 2 R_w");
    }
    if (r.kind == "lattice") {
        r.lattice = s.string("lattice");
        try {
            const auto k = lattice_kind_from_string(r.lattice);
            if ((k == LatticeKind::Z_1D) != (cfg.kernel.d == 1) || cfg.kernel.d > 2)
                throw ConfigError(s.at("lattice"), "lattice dimension differs from kernel.d");
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(s.at("lattice"), e.what());
        }
    }
    if (r.kind == "tridiagonal") {
        if (cfg.kernel.d != 1 || !cfg.kernel.is_log() || cfg.potential.kind != PotentialSpec::Kind::Quadratic)
            throw ConfigError(s.at("kind"), "tridiagonal sampler needs the 1D log kernel with a quadratic potential");
        if (cfg.N < 2) throw ConfigError("model.N", "tridiagonal sampler needs N >= 2");
    }
    if (r.kind == "ginibre") {
        if (cfg.kernel.d != 2 || !cfg.kernel.is_log() || cfg.potential.kind != PotentialSpec::Kind::Quadratic ||
            cfg.potential.a != 1.0)
            throw ConfigError(s.at("kind"), "Ginibre sampler matches the 2D log kernel with V = |z|^2");
        if (cfg.betas.size() != 1 || cfg.betas[0] != 2.0) throw ConfigError("model.beta", "Ginibre sampler needs beta = 2");
        if (cfg.N < 2 || cfg.N > 1024) throw ConfigError("model.N", "Ginibre sampler needs 2 <= N <= 1024");
    }
    if (!micro && cfg.ladder) throw ConfigError("model.beta_ladder", "reference samplers take a single beta");
    s.finish();
    cfg.reference = r;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
    }
    if (seed_override) {
        if (!doc.is_object() || !doc.contains("sampler") || !doc["sampler"].is_object())
            throw ConfigError("sampler", "missing required key");
        doc["sampler"]["seed"] = *seed_override;
    }
    ExperimentConfig cfg;
    Section root(doc, "");
    parse_kernel(root.section("kernel"), cfg);
    parse_potential(root.section("potential"), cfg);
    {
        Section g = root.section("grid");
        cfg.grid_extent = g.positive("extent");
        cfg.grid_h = g.positive("h");
        if (cfg.grid_h > cfg.grid_extent) throw ConfigError("grid.h", "must be smaller than the extent");
        g.finish();
        const double cells = std::pow(2.0 * cfg.grid_extent / cfg.grid_h, cfg.kernel.d);
        if (cells > 4e6) throw ConfigError("grid.h", "grid exceeds 4e6 cells");
    }
    if (root.has("solver")) parse_solver(root.section("solver"), cfg);
    parse_model(root.section("model"), cfg);
    parse_sampler(root.section("sampler"), cfg, seed_override);
    parse_analysis(root.section("analysis"), cfg);
    parse_output(root.section("output"), cfg);
    if (root.has("free_energy")) parse_free_energy(root.section("free_energy"), cfg);
    if (root.has("reference")) parse_reference(root.section("reference"), cfg);
    root.finish();
    cfg.canonical = doc.dump(2) + "\n";
    cfg.hash = sha256_hex(doc.dump());
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), seed_override);
}

}  // namespace rgl
