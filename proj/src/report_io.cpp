#include "teamci/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "teamci/errors.hpp"

namespace teamci {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("csv: row width " + std::to_string(cells.size()) +
                                " does not match " + std::to_string(columns_.size()) +
                                " columns");
  rows_.push_back(std::move(cells));
}

namespace {

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns_.size(); ++c)
    os << (c ? "," : "") << csv_escape(columns_[c]);
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_escape(row[c]);
    os << "\n";
  }
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
  write_text_file(path, to_string());
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string file_digest(const std::filesystem::path& path) {
  std::string content = read_text_file(path);
  std::uint64_t h =
      fnv1a64({reinterpret_cast<const unsigned char*>(content.data()), content.size()});
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json doc;
  doc["argv"] = argv;
  doc["command"] = command;
  doc["input_path"] = input_path;
  doc["input_digest"] = input_digest;
  doc["options"] = options;
  doc["outputs"] = outputs;
  doc["wall_seconds"] = wall_seconds;
  return doc;
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  RunManifest m;
  m.argv = doc.at("argv").get<std::vector<std::string>>();
  m.command = doc.at("command").get<std::string>();
  m.input_path = doc.at("input_path").get<std::string>();
  m.input_digest = doc.at("input_digest").get<std::string>();
  m.options = doc.at("options").get<std::map<std::string, std::string>>();
  m.outputs = doc.at("outputs").get<std::vector<std::string>>();
  m.wall_seconds = doc.at("wall_seconds").get<double>();
  return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
  write_text_file(path, to_json().dump(2) + "\n");
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace teamci
