#include "fieldtrace/intervene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fieldtrace/aggregate.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"

namespace fieldtrace {

using nlohmann::json;

std::string_view condition_name(Condition c) noexcept {
  switch (c) {
    case Condition::Suppress: return "suppress";
    case Condition::Enhance: return "enhance";
    case Condition::RandomControl: return "random_control";
    case Condition::Baseline: return "baseline";
  }
  return "?";
}

Condition parse_condition(std::string_view s) {
  for (auto c : {Condition::Suppress, Condition::Enhance, Condition::RandomControl, Condition::Baseline})
    if (s == condition_name(c)) return c;
  throw Error(Errc::InvalidArgument, "unknown condition: " + std::string(s));
}

void validate_plan(const InterventionPlan& p) {
  auto fail = [](const std::string& why) { throw Error(Errc::ConfigContradiction, why); };
  if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) fail("beta must be finite and non-negative");
  switch (p.condition) {
    case Condition::Suppress:
      if (!(p.beta < 1.0)) fail("suppress needs beta < 1 (beta = 1 is the baseline)");
      break;
    case Condition::Enhance:
      if (!(p.beta > 1.0)) fail("enhance needs beta > 1 (beta = 1 is the baseline)");
      break;
    case Condition::RandomControl:
      if (p.beta != 0.0) fail("random control uses beta = 0");
      if (!p.trial_index) fail("random control needs a trial index");
      break;
    case Condition::Baseline:
      if (!p.targets.empty()) fail("baseline has no targets");
      if (p.beta != 1.0) fail("baseline uses beta = 1");
      return;
  }
  if (!p.target_field) fail("plan needs a target field");
  if (p.targets.empty()) fail("plan has no targets");
}

std::vector<InterventionPlan> build_plans(const std::vector<SelectionResult>& selections,
                                          const PlanOptions& opts) {
  if (selections.empty()) throw Error(Errc::EmptySelection, "no selection results given");
  if (opts.n_random_trials < 0) throw Error(Errc::ConfigContradiction, "negative trial count");
  for (double b : opts.betas_suppress)
    if (!(b >= 0.0 && b < 1.0))
      throw Error(Errc::ConfigContradiction, "suppress betas must lie in [0, 1)");
  for (double b : opts.betas_enhance)
    if (!(b > 1.0) || !std::isfinite(b))
      throw Error(Errc::ConfigContradiction, "enhance betas must be > 1");

  std::uint32_t n_layers = opts.n_layers, dim = opts.dim_per_layer;
  std::set<NeuronId> excluded;
  std::set<FieldKind> seen;
  for (const auto& s : selections) {
    if (s.positive_set.empty())
      throw Error(Errc::EmptySelection,
                  "positive set is empty for " + std::string(field_name(s.field)));
    if (!seen.insert(s.field).second)
      throw Error(Errc::ConfigContradiction,
                  "two selections for " + std::string(field_name(s.field)));
    if (opts.n_layers == 0) n_layers = std::max(n_layers, s.n_layers);
    if (opts.dim_per_layer == 0) dim = std::max(dim, s.dim_per_layer);
    for (const auto& n : s.positive_set) excluded.insert(n.id);
  }
  if (n_layers == 0 || dim == 0)
    throw Error(Errc::ConfigContradiction, "neuron space size is unknown");
  for (const auto& id : excluded)
    if (id.layer >= n_layers || id.neuron >= dim)
      throw Error(Errc::ConfigContradiction, "selected neuron outside the neuron space");
  const std::uint64_t space = std::uint64_t{n_layers} * dim;

  std::vector<InterventionPlan> plans;
  InterventionPlan baseline;
  baseline.seed = opts.seed;
  plans.push_back(baseline);

  for (const auto& s : selections) {
    std::vector<NeuronId> targets;
    for (const auto& n : s.positive_set) targets.push_back(n.id);
    std::sort(targets.begin(), targets.end());
    auto add = [&](Condition c, double beta) {
      InterventionPlan p;
      p.condition = c;
      p.beta = beta;
      p.target_field = s.field;
      p.targets = targets;
      p.seed = opts.seed;
      plans.push_back(std::move(p));
    };
    for (double b : opts.betas_suppress) add(Condition::Suppress, b);
    for (double b : opts.betas_enhance) add(Condition::Enhance, b);

    if (excluded.size() + targets.size() > space)
      throw Error(Errc::ConfigContradiction, "neuron space too small for a random control");
    for (int t = 0; t < opts.n_random_trials; ++t) {
      InterventionPlan p;
      p.condition = Condition::RandomControl;
      p.beta = 0.0;
      p.target_field = s.field;
      p.trial_index = t;
      p.seed = derive_seed(opts.seed, field_index(s.field) * 1000 + static_cast<std::uint64_t>(t));
      std::mt19937_64 rng(p.seed);
      std::uniform_int_distribution<std::uint64_t> pick(0, space - 1);
      std::set<NeuronId> chosen;
      while (chosen.size() < targets.size()) {
        const auto flat = pick(rng);
        const NeuronId id{static_cast<std::uint32_t>(flat / dim), static_cast<std::uint32_t>(flat % dim)};
        if (!excluded.count(id)) chosen.insert(id);
      }
      p.targets.assign(chosen.begin(), chosen.end());
      plans.push_back(std::move(p));
    }
  }
  for (const auto& p : plans) validate_plan(p);
  return plans;
}

ConditionReport report_from_corpus(const std::vector<CorpusEntry>& corpus, double schema_validity) {
  if (!(schema_validity >= 0.0 && schema_validity <= 1.0))
    throw Error(Errc::InvalidArgument, "schema validity must lie in [0, 1]");
  const auto table = aggregate_accuracy(corpus);
  FieldTallies sum{};
  for (const auto& [key, tallies] : table.fields)
    for (std::size_t f = 0; f < kFieldCount; ++f) {
      sum[f].correct += tallies[f].correct;
      sum[f].hallucinated += tallies[f].hallucinated;
      sum[f].unverifiable += tallies[f].unverifiable;
    }
  ConditionReport r;
  for (std::size_t f = 0; f < kFieldCount; ++f) r.accuracy[f] = sum[f].accuracy();
  r.schema_validity = schema_validity;
  r.n_references = corpus.size();
  return r;
}

namespace {

double targeted(const ConditionReport& r, FieldKind f, std::string_view what) {
  const auto& a = r.accuracy[field_index(f)];
  if (!a)
    throw Error(Errc::MissingCondition,
                std::string(what) + " has no accuracy for " + std::string(field_name(f)));
  return *a;
}

PairedTest paired(std::string name, Direction dir, const std::array<double, kFieldCount>& treated,
                  const std::array<double, kFieldCount>& reference, double tol) {
  PairedTest t;
  t.name = std::move(name);
  t.direction = dir;
  std::vector<double> deltas;
  double sum = 0.0;
  for (auto f : kAllFields) {
    DeltaRow row;
    row.field = f;
    row.treated = 100.0 * treated[field_index(f)];
    row.reference = 100.0 * reference[field_index(f)];
    row.delta_pp = row.treated - row.reference;
    deltas.push_back(row.delta_pp);
    sum += row.delta_pp;
    t.rows.push_back(row);
  }
  t.mean_delta_pp = sum / static_cast<double>(kFieldCount);
  try {
    t.wilcoxon = wilcoxon_one_sided(deltas, dir, tol);
  } catch (const Error& e) {
    if (e.code() != Errc::AllZero) throw;
    t.wilcoxon.statistic = 0.0;
    t.wilcoxon.p_value = 1.0;
    t.wilcoxon.n = 0;
    t.wilcoxon.method_note = "every difference is zero or tied; no test performed";
  }
  return t;
}

bool applies_to(const LabeledReport& r, FieldKind f) {
  return !r.target_field || *r.target_field == f;
}

}  // namespace

ConditionAnalysis analyze_conditions(const std::vector<LabeledReport>& reports,
                                     const ConditionReport& baseline, const AnalysisOptions& opts) {
  std::array<double, kFieldCount> base{}, enhance{}, suppress{}, random{};
  for (auto f : kAllFields) {
    const auto fi = field_index(f);
    base[fi] = targeted(baseline, f, "baseline");
    std::optional<double> enh, sup;
    double rnd_sum = 0.0;
    int rnd_n = 0;
    for (const auto& r : reports) {
      if (!applies_to(r, f)) continue;
      if (r.condition == Condition::Enhance && r.beta == opts.enhance_beta && r.target_field)
        enh = targeted(r.report, f, "enhance");
      else if (r.condition == Condition::Suppress && r.beta == opts.suppress_beta && r.target_field)
        sup = targeted(r.report, f, "suppress");
      else if (r.condition == Condition::RandomControl) {
        rnd_sum += targeted(r.report, f, "random control");
        ++rnd_n;
      }
    }
    const std::string fname(field_name(f));
    if (!enh) throw Error(Errc::MissingCondition, "no enhance report for " + fname);
    if (!sup) throw Error(Errc::MissingCondition, "no suppress report for " + fname);
    if (rnd_n == 0) throw Error(Errc::MissingCondition, "no random control report for " + fname);
    enhance[fi] = *enh;
    suppress[fi] = *sup;
    random[fi] = rnd_sum / rnd_n;
  }

  ConditionAnalysis out;
  out.tests[0] = paired("enhancement", Direction::Less, enhance, base, 0.0);
  out.tests[1] = paired("random_ablation", Direction::Less, random, base, 0.0);
  out.tests[2] = paired("suppression_specificity", Direction::Greater, suppress, random,
                        opts.tie_tolerance_pp);

  for (const auto& r : reports) {
    if (!r.target_field) continue;
    if (r.condition != Condition::Enhance && r.condition != Condition::Suppress) continue;
    const FieldKind f = *r.target_field;
    const double delta = 100.0 * (targeted(r.report, f, "condition") - base[field_index(f)]);
    const bool contrary = r.condition == Condition::Enhance ? delta > 0.0 : delta < 0.0;
    if (contrary) out.flags.push_back({r.condition, r.beta, f, delta});
  }
  return out;
}

json to_json(const InterventionPlan& p) {
  json targets = json::array();
  for (const auto& t : p.targets) targets.push_back({{"layer", t.layer}, {"neuron", t.neuron}});
  return json{{"condition", condition_name(p.condition)},
              {"beta", p.beta},
              {"target_field", p.target_field ? json(field_name(*p.target_field)) : json(nullptr)},
              {"targets", targets},
              {"seed", p.seed},
              {"trial_index", p.trial_index ? json(*p.trial_index) : json(nullptr)},
              {"greedy_decoding", p.greedy_decoding}};
}

InterventionPlan plan_from_json(const json& j) {
  InterventionPlan p;
  try {
    p.condition = parse_condition(j.at("condition").get<std::string>());
    p.beta = j.at("beta").get<double>();
    if (!j.at("target_field").is_null())
      p.target_field = parse_field(j["target_field"].get<std::string>());
    for (const auto& t : j.at("targets"))
      p.targets.push_back({t.at("layer").get<std::uint32_t>(), t.at("neuron").get<std::uint32_t>()});
    p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trial_index") && !j["trial_index"].is_null())
      p.trial_index = j["trial_index"].get<int>();
    p.greedy_decoding = j.value("greedy_decoding", true);
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("intervention plan: ") + e.what());
  }
  validate_plan(p);
  return p;
}

json to_json(const ConditionReport& r) {
  json acc = json::object();
  for (auto f : kAllFields) {
    const auto& a = r.accuracy[field_index(f)];
    acc[std::string(field_name(f))] = a ? json(*a) : json(nullptr);
  }
  return json{{"accuracy", acc}, {"schema_validity", r.schema_validity}, {"n_references", r.n_references}};
}

ConditionReport condition_report_from_json(const json& j) {
  ConditionReport r;
  try {
    const auto& acc = j.at("accuracy");
    for (auto f : kAllFields) {
      const std::string key(field_name(f));
      if (acc.contains(key) && !acc[key].is_null()) {
        const double v = acc[key].get<double>();
        if (!(v >= 0.0 && v <= 1.0))
          throw Error(Errc::SchemaViolation, "accuracy for " + key + " outside [0, 1]");
        r.accuracy[field_index(f)] = v;
      }
    }
    r.schema_validity = j.value("schema_validity", 1.0);
    r.n_references = j.value("n_references", std::size_t{0});
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("condition report: ") + e.what());
  }
  return r;
}

json to_json(const LabeledReport& r) {
  return json{{"condition", condition_name(r.condition)},
              {"beta", r.beta},
              {"target_field", r.target_field ? json(field_name(*r.target_field)) : json(nullptr)},
              {"trial_index", r.trial_index ? json(*r.trial_index) : json(nullptr)},
              {"report", to_json(r.report)}};
}

LabeledReport labeled_report_from_json(const json& j) {
  LabeledReport r;
  try {
    r.condition = parse_condition(j.at("condition").get<std::string>());
    r.beta = j.value("beta", r.condition == Condition::RandomControl ? 0.0 : 1.0);
    if (j.contains("target_field") && !j["target_field"].is_null())
      r.target_field = parse_field(j["target_field"].get<std::string>());
    if (j.contains("trial_index") && !j["trial_index"].is_null())
      r.trial_index = j["trial_index"].get<int>();
    r.report = condition_report_from_json(j.at("report"));
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("labeled report: ") + e.what());
  }
  return r;
}

json to_json(const ConditionAnalysis& a) {
  json tests = json::array();
  for (const auto& t : a.tests) {
    json rows = json::array();
    for (const auto& r : t.rows)
      rows.push_back({{"field", field_name(r.field)},
                      {"treated", r.treated},
                      {"reference", r.reference},
                      {"delta_pp", r.delta_pp}});
    tests.push_back({{"name", t.name},
                     {"direction", t.direction == Direction::Less ? "less" : "greater"},
                     {"rows", rows},
                     {"mean_delta_pp", t.mean_delta_pp},
                     {"wilcoxon", to_json(t.wilcoxon)}});
  }
  json flags = json::array();
  for (const auto& f : a.flags)
    flags.push_back({{"condition", condition_name(f.condition)},
                     {"beta", f.beta},
                     {"field", field_name(f.field)},
                     {"delta_pp", f.delta_pp}});
  return json{{"tests", tests}, {"contrary_flags", flags}};
}

}  // namespace fieldtrace
