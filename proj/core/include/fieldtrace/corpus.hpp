#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fieldtrace/refmodel.hpp"

namespace fieldtrace {

/// One line of corpus.jsonl: a reference with its final labels and verdict.
struct CorpusEntry {
  std::string model_tag;
  Reference reference;
  FieldLabels labels;
  Verdict verdict = Verdict::Unsupported;
  Verdict stage1_verdict = Verdict::Unsupported;
  bool judge_overridden = false;
  bool adjudicated = false;
  std::optional<std::string> matched_work;  // OpenAlex id
  std::optional<double> composite;
};

void to_json(nlohmann::json& j, const CorpusEntry& e);
void from_json(const nlohmann::json& j, CorpusEntry& e);

std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<CorpusEntry>& entries);

}  // namespace fieldtrace
