#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace teamci {

// Doubles print with 17 significant digits so CSV values round-trip losslessly.
std::string format_g17(double v);

// Minimal CSV emitter with a fixed column order.  Cells containing commas or
// quotes are quoted.  Output is deterministic: identical rows give identical
// bytes.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// FNV-1a 64-bit digest, hex-encoded; used to fingerprint input files.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::string file_digest(const std::filesystem::path& path);

// Everything needed to reproduce a CLI run bit-for-bit: the argv, the input
// digest, all effective options (defaults included), and the produced files.
// Timing is recorded for the log but never enters CSV output.
struct RunManifest {
  std::vector<std::string> argv;
  std::string command;
  std::string input_path;
  std::string input_digest;
  std::map<std::string, std::string> options;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace teamci
