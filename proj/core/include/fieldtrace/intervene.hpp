#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fieldtrace/corpus.hpp"
#include "fieldtrace/featstore.hpp"
#include "fieldtrace/neuronsel.hpp"
#include "fieldtrace/stats.hpp"

namespace fieldtrace {

enum class Condition { Suppress, Enhance, RandomControl, Baseline };
std::string_view condition_name(Condition c) noexcept;  // "suppress", ...
Condition parse_condition(std::string_view s);

/// Scale factor beta applied to the pre-projection activation of each target.
struct InterventionPlan {
  Condition condition = Condition::Baseline;
  double beta = 1.0;
  std::optional<FieldKind> target_field;  // none for Baseline
  std::vector<NeuronId> targets;
  std::uint64_t seed = 0;
  std::optional<int> trial_index;  // RandomControl only
  bool greedy_decoding = true;
};

/// Throws ConfigContradiction when condition, beta and targets disagree.
void validate_plan(const InterventionPlan& plan);

struct PlanOptions {
  std::vector<double> betas_suppress{0.0, 0.5};
  std::vector<double> betas_enhance{2.0, 4.0};
  int n_random_trials = 5;
  std::uint32_t n_layers = 0;  // 0: taken from the selections
  std::uint32_t dim_per_layer = 0;
  std::uint64_t seed = 0;
};

/// Suppress and Enhance plans on each field's positive set, RandomControl
/// trials of the same size drawn outside every field's positive set, and one
/// Baseline. Throws EmptySelection and ConfigContradiction.
std::vector<InterventionPlan> build_plans(const std::vector<SelectionResult>& selections,
                                          const PlanOptions& opts);

struct ConditionReport {
  std::array<std::optional<double>, kFieldCount> accuracy;  // in [0, 1]
  double schema_validity = 1.0;
  std::size_t n_references = 0;
};

/// Field accuracies over a verified corpus.
ConditionReport report_from_corpus(const std::vector<CorpusEntry>& corpus, double schema_validity);

struct LabeledReport {
  Condition condition = Condition::Baseline;
  double beta = 1.0;
  std::optional<FieldKind> target_field;  // RandomControl without a field covers all fields
  std::optional<int> trial_index;
  ConditionReport report;
};

struct AnalysisOptions {
  double enhance_beta = 4.0;
  double suppress_beta = 0.0;
  double tie_tolerance_pp = 0.15;
};

struct DeltaRow {
  FieldKind field = FieldKind::Title;
  double treated = 0.0;    // percent
  double reference = 0.0;  // percent
  double delta_pp = 0.0;   // treated - reference
};

struct PairedTest {
  std::string name;
  Direction direction = Direction::Less;
  std::vector<DeltaRow> rows;
  double mean_delta_pp = 0.0;
  TestResult wilcoxon;
};

struct ContraryFlag {
  Condition condition = Condition::Baseline;
  double beta = 0.0;
  FieldKind field = FieldKind::Title;
  double delta_pp = 0.0;  // targeted accuracy vs baseline
};

struct ConditionAnalysis {
  std::array<PairedTest, 3> tests;  // enhancement, random ablation, suppression specificity
  std::vector<ContraryFlag> flags;
};

/// Targeted-field deltas: Enhance vs Baseline (less), RandomControl vs
/// Baseline (less), Suppress vs RandomControl (greater). RandomControl is
/// averaged over trials. Throws MissingCondition.
ConditionAnalysis analyze_conditions(const std::vector<LabeledReport>& reports,
                                     const ConditionReport& baseline,
                                     const AnalysisOptions& opts = {});

nlohmann::json to_json(const InterventionPlan& p);
InterventionPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConditionReport& r);
ConditionReport condition_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabeledReport& r);
LabeledReport labeled_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConditionAnalysis& a);

}  // namespace fieldtrace
