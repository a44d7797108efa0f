#include "fieldtrace/corpus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

using nlohmann::json;

void to_json(json& j, const CorpusEntry& e) {
  j = json(e.reference);
  j["model"] = e.model_tag;
  j["labels"] = e.labels;
  j["verdict"] = verdict_name(e.verdict);
  j["stage1_verdict"] = verdict_name(e.stage1_verdict);
  j["judge_overridden"] = e.judge_overridden;
  j["adjudicated"] = e.adjudicated;
  j["matched_work"] = e.matched_work ? json(*e.matched_work) : json(nullptr);
  j["composite"] = e.composite ? json(*e.composite) : json(nullptr);
}

void from_json(const json& j, CorpusEntry& e) {
  e.reference = j.get<Reference>();
  e.model_tag = j.value("model", std::string{});
  e.labels = j.at("labels").get<FieldLabels>();
  e.verdict = parse_verdict(j.at("verdict").get<std::string>());
  e.stage1_verdict = j.contains("stage1_verdict")
                         ? parse_verdict(j["stage1_verdict"].get<std::string>())
                         : e.verdict;
  e.judge_overridden = j.value("judge_overridden", false);
  e.adjudicated = j.value("adjudicated", false);
  if (j.contains("matched_work") && j["matched_work"].is_string())
    e.matched_work = j["matched_work"].get<std::string>();
  if (j.contains("composite") && j["composite"].is_number())
    e.composite = j["composite"].get<double>();
}

std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open corpus " + path.string());
  std::vector<CorpusEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<CorpusEntry>());
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedJson,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<CorpusEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  for (const auto& e : entries) out << json(e).dump() << '\n';
}

}  // namespace fieldtrace
