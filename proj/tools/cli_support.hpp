#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fieldtrace::cli {

/// Bad flags or flag combinations; the process exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column. Throws Error(InvalidArgument) when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
  std::vector<std::string> strings(const std::string& name) const;
};

/// Comma-separated table with a header row; no quoting.
Csv read_csv(const std::filesystem::path& path);

/// A JSON array, or one JSON value per non-empty line.
std::vector<nlohmann::json> read_json_records(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

double parse_number(const std::string& s);

/// Collects artifacts for one invocation and writes the manifest.
class RunOutput {
 public:
  RunOutput(std::optional<std::filesystem::path> out_dir, bool json_stdout);

  bool has_dir() const { return dir_.has_value(); }
  bool json_stdout() const { return json_stdout_; }

  /// Path for a named artifact under the output dir; records it for the manifest.
  std::filesystem::path artifact(const std::string& name);
  /// Records a file written outside the output dir.
  void record(const std::filesystem::path& path);

  void write_text(const std::string& name, const std::string& text);
  void write_json(const std::string& name, const nlohmann::json& j);

  /// Writes the resolved config and manifest.json (when an output dir is set)
  /// and prints either the JSON result or the summary line.
  void finish(const std::string& command, const nlohmann::json& result, const std::string& summary,
              const std::string& resolved_config);

 private:
  std::optional<std::filesystem::path> dir_;
  bool json_stdout_ = false;
  std::vector<std::filesystem::path> files_;
};

}  // namespace fieldtrace::cli
