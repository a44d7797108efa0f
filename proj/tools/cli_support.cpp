#include "cli_support.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace::cli {

using text::trim;

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << bytes;
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

}  // namespace

std::size_t Csv::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(Errc::InvalidArgument, "CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> Csv::numbers(const std::string& name) const {
  std::vector<double> out;
  for (const auto& s : strings(name)) out.push_back(parse_number(s));
  return out;
}

std::vector<std::string> Csv::strings(const std::string& name) const {
  const auto c = column(name);
  std::vector<std::string> out;
  for (const auto& row : rows) {
    if (c >= row.size()) throw Error(Errc::InvalidArgument, "short CSV row");
    out.push_back(row[c]);
  }
  return out;
}

Csv read_csv(const fs::path& path) {
  std::istringstream in(slurp(path));
  Csv csv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    if (csv.header.empty()) csv.header = split_commas(line);
    else csv.rows.push_back(split_commas(line));
  }
  if (csv.header.empty()) throw Error(Errc::InvalidArgument, path.string() + ": empty CSV");
  return csv;
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedJson, path.string() + ": " + e.what());
  }
}

std::vector<json> read_json_records(const fs::path& path) {
  const std::string text = slurp(path);
  const std::string head = trim(text.substr(0, 64));
  std::vector<json> out;
  try {
    if (!head.empty() && head[0] == '[') {
      for (auto& j : json::parse(text)) out.push_back(std::move(j));
      return out;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
      if (!trim(line).empty()) out.push_back(json::parse(line));
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedJson, path.string() + ": " + e.what());
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(Errc::InvalidArgument, "not a number: '" + s + "'");
  return v;
}

RunOutput::RunOutput(std::optional<fs::path> out_dir, bool json_stdout)
    : dir_(std::move(out_dir)), json_stdout_(json_stdout) {
  if (dir_) fs::create_directories(*dir_);
}

fs::path RunOutput::artifact(const std::string& name) {
  if (!dir_) throw UsageError("--out DIR is required to write " + name);
  const fs::path p = *dir_ / name;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  record(p);
  return p;
}

void RunOutput::record(const fs::path& path) {
  if (std::find(files_.begin(), files_.end(), path) == files_.end()) files_.push_back(path);
}

void RunOutput::write_text(const std::string& name, const std::string& text) {
  if (!dir_) return;
  write_file(artifact(name), text);
}

void RunOutput::write_json(const std::string& name, const json& j) {
  write_text(name, j.dump(2) + "\n");
}

void RunOutput::finish(const std::string& command, const json& result, const std::string& summary,
                       const std::string& resolved_config) {
  if (dir_) {
    write_text("config.toml", resolved_config);
    write_json("result.json", result);
    json files = json::array();
    for (const auto& p : files_) {
      const auto rel = p.lexically_relative(*dir_);
      const bool inside = !rel.empty() && *rel.begin() != "..";
      files.push_back({{"path", inside ? rel.generic_string() : p.string()},
                       {"sha256", sha256_file(p)},
                       {"bytes", fs::file_size(p)}});
    }
    write_file(*dir_ / "manifest.json", json{{"command", command}, {"files", files}}.dump(2) + "\n");
  }
  if (json_stdout_) std::cout << result.dump(2) << "\n";
  else std::cout << summary << "\n";
}

}  // namespace fieldtrace::cli
