#include "run_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <json.hpp>
#include <sstream>

#include "rgl/experiment.hpp"

#ifndef RGL_VERSION
#define RGL_VERSION "unknown"
#endif

namespace rgl {

namespace {

std::string hex(const unsigned char* p, unsigned n) {
    static const char* digits = "0123456789abcdef";
    std::string s(2 * n, '0');
    for (unsigned i = 0; i < n; ++i) {
        s[2 * i] = digits[p[i] >> 4];
        s[2 * i + 1] = digits[p[i] & 15];
    }
    return s;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    void update(const char* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
    std::string hex_digest() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned n = 0;
        EVP_DigestFinal_ex(ctx_, md, &n);
        return hex(md, n);
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex_digest();
}

std::string sha256_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read " + p.string());
    Sha256 h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex_digest();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const BudgetError*>(&e)) return 4;
    if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 3;
    if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const InputError*>(&e)) return 2;
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
    return 1;
}

namespace io {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& file, std::vector<std::string> header)
    : file_(file), out_(file, std::ios::binary | std::ios::trunc), width_(header.size()) {
    if (!out_) throw InputError("cannot write " + file.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::sep() {
    if (filled_ == width_) throw Error("CSV row wider than the header of " + file_.string());
    if (filled_++) out_ << ',';
}

CsvWriter& CsvWriter::cell(double x) {
    sep();
    out_ << fmt(x);
    return *this;
}
CsvWriter& CsvWriter::cell(std::int64_t x) {
    sep();
    out_ << x;
    return *this;
}
CsvWriter& CsvWriter::cell(std::uint64_t x) {
    sep();
    out_ << x;
    return *this;
}
CsvWriter& CsvWriter::cell(const std::string& s) {
    sep();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != width_) throw Error("CSV row narrower than the header of " + file_.string());
    out_ << '\n';
    filled_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw InputError("failed writing " + file_.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& file, const std::vector<std::string>& expected) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot read " + file.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw InputError(file.filename().string() + ": empty file");
    t.header = split(line);
    for (std::size_t i = 0; i < std::max(t.header.size(), expected.size()); ++i) {
        const std::string got = i < t.header.size() ? t.header[i] : "<none>";
        const std::string want = i < expected.size() ? expected[i] : "<none>";
        if (got != want)
            throw InputError(file.filename().string() + ": column " + std::to_string(i + 1) + " expected '" + want +
                             "', found '" + got + "'");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != t.header.size())
            throw InputError(file.filename().string() + ": row " + std::to_string(lineno) + " has " +
                             std::to_string(row.size()) + " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

double parse_double(const std::string& s, const std::string& where) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw InputError(where + ": not a number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InputError(where + ": not an integer '" + s + "'");
    return v;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw InputError("failed writing " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void begin_run(const std::filesystem::path& dir, const std::string& config_text) {
    std::filesystem::create_directories(dir);
    std::filesystem::remove(dir / "manifest.json");
    write_text(dir / "config.json", config_text);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& config_hash,
                    std::uint64_t seed, double wall_seconds) {
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(e.path(), dir).generic_string();
        if (rel == "manifest.json" || rel == "manifest.json.tmp") continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    nlohmann::ordered_json m;
    m["command"] = command;
    m["config_hash"] = config_hash;
    m["code_version"] = RGL_VERSION;
    m["seeds"] = {{"sampler", seed}};
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["wall_clock"] = {{"finished_utc", stamp}, {"seconds", wall_seconds}};
    auto inv = nlohmann::ordered_json::array();
    for (const auto& f : files)
        inv.push_back({{"path", f}, {"bytes", std::filesystem::file_size(dir / f)}, {"sha256", sha256_file(dir / f)}});
    m["files"] = inv;
    // rename so a crash never leaves a half-written manifest
    write_text(dir / "manifest.json.tmp", m.dump(2) + "\n");
    std::filesystem::rename(dir / "manifest.json.tmp", dir / "manifest.json");
}

}  // namespace io

}  // namespace rgl
