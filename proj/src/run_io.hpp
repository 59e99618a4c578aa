#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rgl::io {

/// Shortest text that reads back as the same double ("%.17g"); nan and inf
/// are spelled out.
std::string fmt(double x);

/// CSV file with a fixed header; every row must match its width.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, std::vector<std::string> header);
    CsvWriter& cell(double x);
    CsvWriter& cell(std::int64_t x);
    CsvWriter& cell(std::uint64_t x);
    CsvWriter& cell(int x) { return cell(static_cast<std::int64_t>(x)); }
    CsvWriter& cell(const std::string& s);
    void end_row();
    void close();

private:
    void sep();
    std::filesystem::path file_;
    std::ofstream out_;
    std::size_t width_ = 0, filled_ = 0;
};

/// Parsed CSV table with named columns.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads `file` and checks that its header equals `expected`; the error names
/// the first offending column.
CsvTable read_csv(const std::filesystem::path& file, const std::vector<std::string>& expected);
double parse_double(const std::string& s, const std::string& where);
std::uint64_t parse_u64(const std::string& s, const std::string& where);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

/// Removes a stale manifest so the directory reads as incomplete while a
/// command runs.
void begin_run(const std::filesystem::path& dir, const std::string& config_text);

/// Writes manifest.json listing every other file under `dir` with its SHA-256.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& config_hash,
                    std::uint64_t seed, double wall_seconds);

}  // namespace rgl::io
