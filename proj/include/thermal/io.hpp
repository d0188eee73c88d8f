#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermal/types.hpp"

namespace thermal {

// Doubles formatted with 17 significant digits (round-trip exact).
std::string format_double(double x);

// FNV-1a over a canonical (sorted-key, compact) JSON dump; embedded in every
// output file so runs can be traced back to their configuration.
std::uint64_t config_hash(const nlohmann::json& config);
std::string hash_hex(std::uint64_t h);

// Writes to "<path>.partial" and renames on commit; a file left behind with
// the .partial suffix marks output from a failed run.
class OutputFile {
 public:
  explicit OutputFile(std::filesystem::path path);
  ~OutputFile();
  std::ostream& stream();
  void commit();

 private:
  std::filesystem::path final_path_;
  std::filesystem::path partial_path_;
  std::unique_ptr<std::ofstream> out_;
  bool committed_ = false;
};

// CSV with a single comment line carrying the config hash and version, then a
// header row. columns[i] must all have equal length.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns, std::uint64_t hash);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Binary sample bank: 8-byte magic "TSPBANK\0", u32 version, u64 config hash,
// u64 rows, u64 cols, then row-major little-endian f64 data.
void write_bank(const std::filesystem::path& path, const Matrix& data, std::uint64_t hash);
struct Bank {
  Matrix data;
  std::uint64_t hash = 0;
};
Bank read_bank(const std::filesystem::path& path);

// Minimal static SVG emitters for the wavefunction line plot and the
// coefficient-magnitude heatmap.
void write_svg_lines(const std::filesystem::path& path, const Vector& x,
                     const std::vector<Vector>& series, const std::vector<std::string>& labels);
void write_svg_heatmap(const std::filesystem::path& path, const Matrix& values);

}  // namespace thermal
