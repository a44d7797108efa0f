#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fieldtrace/corpus.hpp"

namespace fieldtrace {

struct LabelTally {
  std::size_t correct = 0;
  std::size_t hallucinated = 0;
  std::size_t unverifiable = 0;

  void add(Label l);
  /// Correct / (Correct + Hallucinated); absent when the denominator is 0.
  std::optional<double> accuracy() const;
  std::optional<double> hallucination_rate() const;
};

using FieldTallies = std::array<LabelTally, kFieldCount>;

struct VerdictTally {
  std::size_t supported = 0;
  std::size_t total = 0;
  std::optional<double> rate() const;
};

struct AccuracyTable {
  using CellKey = std::pair<std::string, int>;  // (model tag, N)

  std::map<CellKey, FieldTallies> fields;
  std::map<CellKey, VerdictTally> totals;
  std::map<int, FieldTallies> position_fields;       // position_in_prompt
  std::map<int, VerdictTally> position_totals;
  std::map<CitationStyle, FieldTallies> style_fields;

  std::optional<double> accuracy(const std::string& model, FieldKind f, int n) const;
  std::optional<double> total(const std::string& model, int n) const;
  /// Fraction of references at this position that were not Supported.
  std::optional<double> position_hallucination_rate(int position) const;
};

/// Throws Error(InvalidArgument) on an empty corpus.
AccuracyTable aggregate_accuracy(const std::vector<CorpusEntry>& corpus);

/// Per-style samples of field hallucination rate, one value per
/// (model, topic, N) cell; input for the style Kruskal-Wallis test.
std::map<CitationStyle, std::vector<double>> style_rate_samples(
    const std::vector<CorpusEntry>& corpus, FieldKind field);

void to_json(nlohmann::json& j, const AccuracyTable& t);

/// model,n,field,correct,hallucinated,unverifiable,accuracy (accuracy blank when absent)
std::string accuracy_csv(const AccuracyTable& t);
/// position,n_refs,not_supported_rate,<field>_hallucination_rate...
std::string position_csv(const AccuracyTable& t);

}  // namespace fieldtrace
