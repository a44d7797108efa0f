// fieldtrace: command-line front end for the verification, probing, neuron
// selection, statistics and intervention-planning pipeline.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "fieldtrace/aggregate.hpp"
#include "fieldtrace/corpus.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/featstore.hpp"
#include "fieldtrace/hashing.hpp"
#include "fieldtrace/http_transport.hpp"
#include "fieldtrace/intervene.hpp"
#include "fieldtrace/judge.hpp"
#include "fieldtrace/neuronsel.hpp"
#include "fieldtrace/openalex.hpp"
#include "fieldtrace/parallel.hpp"
#include "fieldtrace/probe.hpp"
#include "fieldtrace/serialize.hpp"
#include "fieldtrace/split.hpp"
#include "fieldtrace/stats.hpp"
#include "fieldtrace/synth.hpp"
#include "fieldtrace/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fieldtrace;
using namespace fieldtrace::cli;

namespace {

struct Globals {
  std::string out_dir;
  bool json = false;
  unsigned jobs = default_jobs();
  std::uint64_t seed = 0;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::vector<FieldKind> parse_fields(const std::vector<std::string>& names) {
  std::vector<FieldKind> out;
  for (const auto& n : names) {
    if (n == "all") return {kAllFields.begin(), kAllFields.end()};
    out.push_back(parse_field(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify / aggregate / serialize

struct VerifyArgs {
  std::string references;
  std::string model = "model";
  std::string base_url = "https://api.openalex.org";
  std::string mailto;
  double rate = 10.0;
  int max_retries = 5;
  int backoff_ms = 500;
  std::string cache_dir;
  std::string judge_url;
  int judge_timeout = 60;
  double accept = 0.75;
  double title_correct = 0.90;
  int search_limit = 10;
};

json run_verify(const VerifyArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  std::vector<Reference> refs;
  for (const auto& j : read_json_records(a.references)) refs.push_back(j.get<Reference>());

  ClientConfig cc;
  cc.base_url = a.base_url;
  if (!a.mailto.empty()) cc.mailto = a.mailto;
  if (const char* env = std::getenv("FIELDTRACE_MAILTO"); env && *env) cc.mailto = env;
  cc.max_requests_per_second = a.rate;
  cc.max_retries = a.max_retries;
  cc.backoff_base = std::chrono::milliseconds(a.backoff_ms);
  if (!a.cache_dir.empty()) cc.cache_dir = fs::path(a.cache_dir);
  OpenAlexClient client(cc, std::make_shared<HttplibTransport>());

  std::unique_ptr<Judge> judge;
  if (!a.judge_url.empty()) {
    std::map<std::string, std::string> headers;
    if (const char* tok = std::getenv("FIELDTRACE_JUDGE_TOKEN"); tok && *tok)
      headers["Authorization"] = std::string("Bearer ") + tok;
    judge = std::make_unique<HttpJudge>(a.judge_url, std::chrono::seconds(a.judge_timeout), headers);
  }

  VerifyOptions vo;
  vo.accept_threshold = a.accept;
  vo.title_correct_threshold = a.title_correct;
  vo.search_limit = a.search_limit;

  std::vector<CorpusEntry> corpus(refs.size());
  std::mutex judge_mu;
  parallel_for(refs.size(), g.jobs, [&](std::size_t i) {
    const auto v = verify_reference(refs[i], client, vo);
    CorpusEntry& e = corpus[i];
    e.model_tag = a.model;
    e.reference = refs[i];
    e.labels = v.labels;
    e.verdict = e.stage1_verdict = v.verdict;
    if (v.matched) e.matched_work = v.matched->openalex_id;
    if (v.best) e.composite = v.best->composite;
    if (judge && v.verdict != Verdict::Supported) {
      std::lock_guard lock(judge_mu);
      const auto d = apply_judge(refs[i], v, *judge);
      e.verdict = d.final_verdict;
      e.labels = d.final_labels;
      e.judge_overridden = d.overridden;
      e.adjudicated = d.adjudicated;
    }
  });

  const fs::path corpus_path = out.artifact("corpus.jsonl");
  write_corpus(corpus_path, corpus);

  std::map<std::string, int> counts;
  for (const auto& e : corpus) ++counts[std::string(verdict_name(e.verdict))];
  const auto c = client.counters();
  summary = "verified " + std::to_string(corpus.size()) + " references";
  return {{"references", corpus.size()},
          {"verdicts", counts},
          {"corpus", corpus_path.string()},
          {"requests", c.requests},
          {"retries", c.retries},
          {"cache_hits", c.cache_hits}};
}

json run_aggregate(const std::string& corpus_path, RunOutput& out, std::string& summary) {
  const auto corpus = read_corpus(corpus_path);
  const auto table = aggregate_accuracy(corpus);
  out.write_text("accuracy.csv", accuracy_csv(table));
  out.write_text("position.csv", position_csv(table));
  json j;
  to_json(j, table);
  json style = json::object();
  for (auto f : kAllFields) {
    std::vector<std::vector<double>> groups;
    for (auto& [s, v] : style_rate_samples(corpus, f))
      if (!v.empty()) groups.push_back(v);
    try {
      style[std::string(field_name(f))] = to_json(kruskal_wallis(groups));
    } catch (const Error& e) {
      style[std::string(field_name(f))] = {{"error", e.what()}};
    }
  }
  j["style_kruskal_wallis"] = style;
  out.write_json("accuracy.json", j);
  summary = "aggregated " + std::to_string(corpus.size()) + " entries into " +
            std::to_string(table.fields.size()) + " (model, N) cells";
  return j;
}

json run_serialize(const std::string& references, const std::string& offsets_path, RunOutput& out,
                   std::string& summary) {
  std::map<std::string, std::vector<CharSpan>> offsets;
  if (!offsets_path.empty())
    for (const auto& j : read_json_records(offsets_path))
      offsets[j.at("id").get<std::string>()] = j.at("offsets").get<std::vector<CharSpan>>();

  json items = json::array();
  std::string lines;
  std::size_t mapped = 0;
  for (const auto& rj : read_json_records(references)) {
    const auto ref = rj.get<Reference>();
    const auto tagged = serialize_reference(ref);
    json item{{"id", ref.id}, {"tagged", tagged}};
    if (const auto it = offsets.find(ref.id); it != offsets.end()) {
      item["token_spans"] = map_spans(tagged, it->second);
      ++mapped;
    }
    lines += item.dump() + "\n";
    items.push_back(std::move(item));
  }
  out.write_text("tagged.jsonl", lines);
  summary = "serialized " + std::to_string(items.size()) + " references (" + std::to_string(mapped) +
            " with token spans)";
  return out.json_stdout() || !out.has_dir() ? items : json{{"references", items.size()}, {"mapped", mapped}};
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string kind = "sparse";
  std::uint32_t planted = 20;
  std::uint32_t dim = 0;
  std::uint32_t layers = 0;
  std::uint32_t per_class = 0;
  double effect = -1;
  double noise = -1;
  std::uint32_t background = 200;
  std::uint32_t topics = 50;
  std::vector<std::uint32_t> signal_layers;
  bool shared_direction = false;
  std::vector<std::string> fields{"all"};
  std::string store;
};

json run_synth(const SynthArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  SynthStore s;
  if (a.kind == "sparse") {
    SparseSynthConfig c;
    if (a.layers) c.n_layers = a.layers;
    if (a.dim) {
      if (a.dim % c.n_layers) throw UsageError("--dim must be a multiple of --layers");
      c.dim_per_layer = a.dim / c.n_layers;
    }
    c.planted_per_field = a.planted;
    if (a.effect >= 0) c.effect = a.effect;
    if (a.noise >= 0) c.noise = a.noise;
    if (a.per_class) c.records_per_class = a.per_class;
    c.background_nnz = a.background;
    c.n_topics = a.topics;
    c.fields = parse_fields(a.fields);
    s = synth_sparse(c, g.seed);
  } else if (a.kind == "dense") {
    DenseSynthConfig c;
    if (a.layers) c.n_layers = a.layers;
    if (a.dim) {
      if (a.dim % c.n_layers) throw UsageError("--dim must be a multiple of --layers");
      c.hidden = a.dim / c.n_layers;
    }
    c.signal_layers = a.signal_layers;
    if (a.effect >= 0) c.effect = a.effect;
    if (a.noise >= 0) c.noise = a.noise;
    if (a.per_class) c.records_per_class = a.per_class;
    c.shared_direction = a.shared_direction;
    c.n_topics = a.topics;
    c.fields = parse_fields(a.fields);
    s = synth_dense(c, g.seed);
  } else {
    throw UsageError("--kind must be sparse or dense");
  }

  fs::path path;
  if (!a.store.empty()) {
    path = a.store;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    out.record(path);
  } else {
    path = out.artifact("synth.cfs1");
  }
  write_store(path, s.header, s.records);
  const std::string digest = sha256_file(path);
  summary = "wrote " + std::to_string(s.records.size()) + " records to " + path.string() + " sha256 " + digest;
  return {{"store", path.string()},
          {"sha256", digest},
          {"kind", store_kind_name(s.header.kind)},
          {"records", s.records.size()},
          {"n_layers", s.header.n_layers},
          {"dim_per_layer", s.header.dim_per_layer},
          {"seed", g.seed}};
}

// ---------------------------------------------------------------------------
// probes

struct ProbeArgs {
  std::string store;
  std::vector<std::string> fields{"all"};
  double train_fraction = 0.8;
  std::optional<std::uint64_t> split_seed;
  std::string eval_unit = "reference";
  double l2 = 1e-2;
  bool no_standardize = false;
  int max_iterations = 1000;
};

ProbeTaskOptions probe_options(const ProbeArgs& a, const Globals& g) {
  ProbeTaskOptions o;
  o.probe.l2_strength = a.l2;
  o.probe.standardize = !a.no_standardize;
  o.probe.max_iterations = a.max_iterations;
  o.eval_unit = parse_eval_unit(a.eval_unit);
  o.seed = g.seed;
  o.jobs = g.jobs;
  return o;
}

json run_probe_sweep(const ProbeArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  const auto corpus = DenseCorpus::load(a.store);
  const auto plan = make_split(corpus.topics(), a.train_fraction, a.split_seed.value_or(g.seed));
  const auto opts = probe_options(a, g);
  const bool explicit_fields = a.fields != std::vector<std::string>{"all"};
  json sweeps = json::array();
  std::string csv;
  std::ostringstream s;
  for (auto f : parse_fields(a.fields)) {
    if (!corpus.has_field(f)) {
      if (explicit_fields) throw Error(Errc::MissingField, std::string(field_name(f)) + " not in store");
      continue;
    }
    const auto sweep = layer_sweep(corpus, f, plan, opts);
    sweeps.push_back(layer_auc_json(f, sweep));
    csv += layer_auc_csv(f, sweep, csv.empty());
    const auto best = std::max_element(sweep.begin(), sweep.end(),
                                       [](const LayerAuc& x, const LayerAuc& y) { return x.auc < y.auc; });
    s << field_name(f) << " peak layer " << best->layer << " AUC " << fmt(best->auc) << "; ";
  }
  json j{{"split", to_json(plan)}, {"sweeps", sweeps}};
  out.write_json("layer_auc.json", j);
  out.write_text("layer_auc.csv", csv);
  summary = s.str();
  return j;
}

json run_crossfield(const ProbeArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  const auto corpus = DenseCorpus::load(a.store);
  const auto plan = make_split(corpus.topics(), a.train_fraction, a.split_seed.value_or(g.seed));
  const auto m = cross_field_matrix(corpus, plan, probe_options(a, g));
  json j = to_json(m);
  j["split"] = to_json(plan);
  out.write_json("crossfield.json", j);
  out.write_text("crossfield.csv", crossfield_csv(m));
  std::ostringstream s;
  s << "diagonal AUC:";
  for (auto f : kAllFields) s << ' ' << field_name(f) << '=' << fmt(m.auc[field_index(f)][field_index(f)]);
  summary = s.str();
  return j;
}

// ---------------------------------------------------------------------------
// neuron selection

struct SelectArgs {
  std::string store;
  std::vector<std::string> fields{"all"};
  std::optional<double> alpha;
  double grid_lo = 1e-5;
  double grid_hi = 1e-1;
  int grid_points = 7;
  double sparsity_penalty = 1.0;
  double val_fraction = 0.2;
  int resamples = 20;
  double subsample = 0.5;
  double threshold = 0.6;
  double l1_ratio = 0.8;
  double learning_rate = 0.05;
  int epochs = 50;
  int batch_size = 256;
  int permutations = 10;
};

struct FieldData {
  FieldKind field;
  SparseDataset data;
};

std::vector<FieldData> load_sparse_fields(const SelectArgs& a, StoreHeader& header) {
  const auto records = read_store(a.store, &header);
  const bool explicit_fields = a.fields != std::vector<std::string>{"all"};
  std::vector<FieldData> out;
  for (auto f : parse_fields(a.fields)) {
    try {
      out.push_back({f, sparse_dataset(header, records, f)});
    } catch (const Error& e) {
      if (explicit_fields || e.code() != Errc::MissingField) throw;
    }
  }
  if (out.empty()) throw Error(Errc::MissingField, "no requested field has records in " + a.store);
  return out;
}

ElasticNetConfig en_config(const SelectArgs& a, const Globals& g) {
  ElasticNetConfig c;
  c.l1_ratio = a.l1_ratio;
  c.learning_rate = a.learning_rate;
  c.epochs = a.epochs;
  c.batch_size = a.batch_size;
  c.seed = g.seed;
  return c;
}

StabilityConfig stab_config(const SelectArgs& a, const Globals& g) {
  StabilityConfig s;
  s.resamples = a.resamples;
  s.subsample_ratio = a.subsample;
  s.threshold = a.threshold;
  s.seed = g.seed;
  s.jobs = g.jobs;
  return s;
}

double choose_alpha(const SelectArgs& a, const Globals& g, const FieldData& fd, RunOutput& out,
                    json& record) {
  if (a.alpha) return *a.alpha;
  GridOptions go;
  go.sparsity_penalty = a.sparsity_penalty;
  go.val_fraction = a.val_fraction;
  go.seed = g.seed;
  go.jobs = g.jobs;
  const auto search =
      alpha_grid_search(fd.data, log_grid(a.grid_lo, a.grid_hi, a.grid_points), en_config(a, g), go);
  out.write_json("alpha_search_" + std::string(field_name(fd.field)) + ".json", to_json(search));
  record["alpha_search"] = to_json(search);
  return search.best_alpha;
}

json run_select(const SelectArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  StoreHeader header;
  const auto fields = load_sparse_fields(a, header);
  std::optional<SynthTruth> truth;
  try {
    truth = truth_from_metadata(header.metadata);
  } catch (const std::exception&) {
  }
  json result = json::object();
  std::ostringstream s;
  for (const auto& fd : fields) {
    json record;
    const double alpha = choose_alpha(a, g, fd, out, record);
    const auto sel = stability_select(fd.data, fd.field, alpha, en_config(a, g), stab_config(a, g));
    const std::string name(field_name(fd.field));
    out.write_json("fh_neurons_" + name + ".json", to_json(sel));
    record["selection"] = to_json(sel);
    s << name << ": alpha " << fmt(alpha) << ", " << sel.stable_neurons.size() << " stable, "
      << sel.positive_set.size() << " positive";
    if (truth && !truth->planted[field_index(fd.field)].empty()) {
      const auto& planted = truth->planted[field_index(fd.field)];
      std::size_t hits = 0;
      for (const auto& n : sel.stable_neurons)
        hits += std::binary_search(planted.begin(), planted.end(), flat_index(n.id, sel.dim_per_layer));
      record["planted_recovered"] = hits;
      record["planted_total"] = planted.size();
      s << ", " << hits << "/" << planted.size() << " planted";
    }
    s << "; ";
    result[name] = record;
  }
  summary = s.str();
  return result;
}

json run_perm_control(const SelectArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  StoreHeader header;
  const auto fields = load_sparse_fields(a, header);
  json result = json::object();
  std::ostringstream s;
  for (const auto& fd : fields) {
    json record;
    const double alpha = choose_alpha(a, g, fd, out, record);
    const auto pc = permutation_control(fd.data, fd.field, alpha, en_config(a, g), stab_config(a, g),
                                        a.permutations);
    const std::string name(field_name(fd.field));
    out.write_json("perm_control_" + name + ".json", to_json(pc));
    record["alpha"] = alpha;
    record["control"] = to_json(pc);
    result[name] = record;
    s << name << ": " << pc.clean_runs << "/" << pc.runs.size() << " clean; ";
  }
  summary = s.str();
  return result;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::vector<double> deltas;
  std::string csv;
  std::string direction = "less";
  double tie_tolerance = 0.0;
  std::vector<double> x, y;
  double rho1 = 0, rho2 = 0;
  std::size_t n1 = 0, n2 = 0;
  int permutations = 9999;
  int resamples = 10000;
  double sigma = 0.001;
  bool resample_points = false;
  std::string column = "delta";
};

Series series_from(const Csv& csv) {
  const auto layers = csv.numbers("layer");
  const auto values = csv.numbers("value");
  Series s;
  for (std::size_t i = 0; i < layers.size(); ++i) s.emplace_back(layers[i], values[i]);
  return s;
}

json run_stats(const std::string& test, const StatsArgs& a, const Globals& g, std::string& summary) {
  TestResult r;
  json extra = json::object();
  if (test == "wilcoxon") {
    std::vector<double> d = a.deltas;
    if (!a.csv.empty()) d = read_csv(a.csv).numbers(a.column);
    if (d.empty()) throw UsageError("wilcoxon needs --deltas or --csv");
    r = wilcoxon_one_sided(d, parse_direction(a.direction), a.tie_tolerance);
  } else if (test == "kruskal") {
    if (a.csv.empty()) throw UsageError("kruskal needs --csv with group,value columns");
    const auto csv = read_csv(a.csv);
    const auto groups = csv.strings("group");
    const auto values = csv.numbers("value");
    std::map<std::string, std::vector<double>> by;
    for (std::size_t i = 0; i < values.size(); ++i) by[groups[i]].push_back(values[i]);
    std::vector<std::vector<double>> gs;
    for (auto& [k, v] : by) gs.push_back(v);
    r = kruskal_wallis(gs);
  } else if (test == "spearman") {
    std::vector<double> x = a.x, y = a.y;
    if (!a.csv.empty()) {
      const auto csv = read_csv(a.csv);
      x = csv.numbers("x");
      y = csv.numbers("y");
    }
    r = spearman(x, y);
  } else if (test == "fisher") {
    r = fisher_z_compare(a.rho1, a.n1, a.rho2, a.n2);
  } else if (test == "trend-variance") {
    if (a.csv.empty()) throw UsageError("trend-variance needs --csv with series,layer,value columns");
    const auto csv = read_csv(a.csv);
    const auto names = csv.strings("series");
    const auto layers = csv.numbers("layer");
    const auto values = csv.numbers("value");
    std::map<std::string, Series> by;
    for (std::size_t i = 0; i < names.size(); ++i) by[names[i]].emplace_back(layers[i], values[i]);
    std::vector<Series> series;
    for (auto& [k, v] : by) series.push_back(v);
    r = trend_variance_permutation(series, a.permutations, g.seed);
  } else if (test == "peak-ci") {
    if (a.csv.empty()) throw UsageError("peak-ci needs --csv with layer,value columns");
    const auto ci = bootstrap_peak_ci(series_from(read_csv(a.csv)), a.resamples, a.sigma, g.seed,
                                      a.resample_points ? PeakResampling::Points : PeakResampling::NoiseOnly);
    summary = "peak layer " + std::to_string(ci.observed_peak_layer) + ", 95% CI [" +
              std::to_string(ci.ci_low) + ", " + std::to_string(ci.ci_high) + "]";
    return to_json(ci);
  }
  summary = test + ": statistic " + fmt(r.statistic) + ", p = " + fmt(r.p_value) + ", n = " + std::to_string(r.n);
  return to_json(r);
}

// ---------------------------------------------------------------------------
// interventions

struct PlanArgs {
  std::vector<std::string> selections;
  std::vector<double> betas_suppress{0.0, 0.5};
  std::vector<double> betas_enhance{2.0, 4.0};
  int trials = 5;
  std::uint32_t n_layers = 0;
  std::uint32_t dim_per_layer = 0;
};

json run_plan(const PlanArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  std::vector<SelectionResult> sels;
  for (const auto& p : a.selections) sels.push_back(selection_from_json(read_json_file(p)));
  PlanOptions o;
  o.betas_suppress = a.betas_suppress;
  o.betas_enhance = a.betas_enhance;
  o.n_random_trials = a.trials;
  o.n_layers = a.n_layers;
  o.dim_per_layer = a.dim_per_layer;
  o.seed = g.seed;
  const auto plans = build_plans(sels, o);
  json arr = json::array();
  std::map<std::string, int> counts;
  for (const auto& p : plans) {
    arr.push_back(to_json(p));
    ++counts[std::string(condition_name(p.condition))];
  }
  out.write_json("plans.json", arr);
  summary = "built " + std::to_string(plans.size()) + " plans";
  return out.json_stdout() || !out.has_dir() ? arr : json{{"plans", plans.size()}, {"by_condition", counts}};
}

json run_analyze(const std::string& reports_path, const AnalysisOptions& o, RunOutput& out,
                 std::string& summary) {
  std::vector<LabeledReport> reports;
  std::optional<ConditionReport> baseline;
  for (const auto& j : read_json_records(reports_path)) {
    auto r = labeled_report_from_json(j);
    if (r.condition == Condition::Baseline) baseline = r.report;
    else reports.push_back(std::move(r));
  }
  if (!baseline) throw Error(Errc::MissingCondition, "no baseline report in " + reports_path);
  const auto a = analyze_conditions(reports, *baseline, o);
  const json j = to_json(a);
  out.write_json("analysis.json", j);
  std::ostringstream s;
  for (const auto& t : a.tests) s << t.name << ": mean " << fmt(t.mean_delta_pp) << " pp, p = " << fmt(t.wilcoxon.p_value) << "; ";
  s << a.flags.size() << " contrary movements";
  summary = s.str();
  return j;
}

// ---------------------------------------------------------------------------
// plot-data

struct PlotArgs {
  std::string corpus;
  std::string layer_auc;
  std::vector<std::string> selections;
  int permutations = 9999;
};

json run_plot_data(const PlotArgs& a, const Globals& g, RunOutput& out, std::string& summary) {
  if (a.corpus.empty() && a.layer_auc.empty() && a.selections.empty())
    throw UsageError("plot-data needs at least one of --corpus, --layer-auc, --selections");
  json result = json::object();
  std::vector<std::string> written;

  if (!a.corpus.empty()) {
    const auto corpus = read_corpus(a.corpus);
    const auto table = aggregate_accuracy(corpus);
    out.write_text("field_accuracy.csv", accuracy_csv(table));
    out.write_text("position.csv", position_csv(table));
    std::ostringstream styles;
    styles.precision(10);
    styles << "style,field,hallucination_rate\n";
    for (auto f : kAllFields)
      for (const auto& [style, values] : style_rate_samples(corpus, f))
        for (double v : values) styles << style_name(style) << ',' << field_name(f) << ',' << v << '\n';
    out.write_text("style_rates.csv", styles.str());
    written.insert(written.end(), {"field_accuracy.csv", "position.csv", "style_rates.csv"});
  }

  if (!a.layer_auc.empty()) {
    const auto doc = read_json_file(a.layer_auc);
    std::ostringstream csv;
    csv.precision(10);
    csv << "field,layer,auc\n";
    std::vector<Series> all;
    json trends = json::object();
    for (const auto& sw : doc.at("sweeps")) {
      Series s;
      std::vector<double> xs, ys;
      for (const auto& l : sw.at("layers")) {
        s.emplace_back(l.at("layer").get<double>(), l.at("auc").get<double>());
        xs.push_back(s.back().first);
        ys.push_back(s.back().second);
        csv << sw.at("field").get<std::string>() << ',' << l.at("layer").get<int>() << ',' << s.back().second << '\n';
      }
      try {
        trends[sw.at("field").get<std::string>()] = to_json(spearman(xs, ys));
      } catch (const Error& e) {
        trends[sw.at("field").get<std::string>()] = {{"error", e.what()}};
      }
      all.push_back(std::move(s));
    }
    result["depth_trend"] = trends;
    if (all.size() >= 2) {
      try {
        result["trend_variance"] = to_json(trend_variance_permutation(all, a.permutations, g.seed));
      } catch (const Error& e) {
        result["trend_variance"] = {{"error", e.what()}};
      }
    }
    out.write_text("layer_auc_series.csv", csv.str());
    written.push_back("layer_auc_series.csv");
  }

  if (!a.selections.empty()) {
    std::ostringstream bands, hist;
    bands.precision(10);
    bands << "field,n_positive,early_pct,middle_pct,late_pct\n";
    hist << "field,layer,count\n";
    for (const auto& p : a.selections) {
      const auto sel = selection_from_json(read_json_file(p));
      const auto b = layer_band_summary(sel, sel.n_layers);
      bands << field_name(sel.field) << ',' << sel.positive_set.size() << ',' << b[0] << ',' << b[1] << ',' << b[2]
            << '\n';
      std::map<std::uint32_t, int> per_layer;
      for (const auto& n : sel.positive_set) ++per_layer[n.id.layer];
      for (const auto& [l, c] : per_layer) hist << field_name(sel.field) << ',' << l << ',' << c << '\n';
    }
    out.write_text("layer_bands.csv", bands.str());
    out.write_text("neuron_layers.csv", hist.str());
    written.insert(written.end(), {"layer_bands.csv", "neuron_layers.csv"});
  }

  result["files"] = written;
  summary = "plot data: " + std::to_string(written.size()) + " tables";
  return result;
}

// Global keys plus the invoked subcommand's section.
std::string resolved_config(const std::string& full, const std::string& section) {
  std::istringstream in(full);
  std::string line, out;
  while (std::getline(in, line)) {
    const std::string key = line.substr(0, line.find('='));
    if (key.find('.') == std::string::npos || key.rfind(section, 0) == 0) out += line + "\n";
  }
  return out;
}

CLI::App* sub(CLI::App& app, const std::string& name, const std::string& desc) {
  auto* s = app.add_subcommand(name, desc);
  s->fallthrough();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fieldtrace: field-level citation hallucination analysis"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Key-value config file (TOML/INI); flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  app.add_option("--out", g.out_dir, "Artifact directory (gets manifest.json and config.toml)");
  app.add_flag("--json", g.json, "Print the machine-readable result to stdout");
  app.add_option("--jobs", g.jobs, "Worker threads for parallel stages")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for every randomized stage");

  VerifyArgs va;
  auto* verify = sub(app, "verify", "Verify references against OpenAlex and write corpus.jsonl");
  verify->add_option("--references", va.references, "JSON array or JSONL of references")->required();
  verify->add_option("--model", va.model, "Model tag recorded in the corpus");
  verify->add_option("--base-url", va.base_url);
  verify->add_option("--mailto", va.mailto, "Polite-pool address (FIELDTRACE_MAILTO overrides)");
  verify->add_option("--rate", va.rate, "Max requests per second");
  verify->add_option("--max-retries", va.max_retries);
  verify->add_option("--backoff-ms", va.backoff_ms);
  verify->add_option("--cache-dir", va.cache_dir);
  verify->add_option("--judge-url", va.judge_url, "Second-stage judge endpoint (token from FIELDTRACE_JUDGE_TOKEN)");
  verify->add_option("--judge-timeout", va.judge_timeout, "Seconds");
  verify->add_option("--accept-threshold", va.accept);
  verify->add_option("--title-threshold", va.title_correct);
  verify->add_option("--search-limit", va.search_limit);

  std::string corpus_path;
  auto* aggregate = sub(app, "aggregate", "Field accuracy tables from a verified corpus");
  aggregate->add_option("--corpus", corpus_path)->required();

  std::string ser_refs, ser_offsets;
  auto* serialize = sub(app, "serialize", "Tagged text and token spans for references");
  serialize->add_option("--references", ser_refs)->required();
  serialize->add_option("--offsets", ser_offsets, "JSONL of {id, offsets: [[start, end], ...]}");

  SynthArgs sa;
  auto* synth = sub(app, "synth", "Write a planted-signal CFS1 store");
  synth->add_option("--kind", sa.kind)->check(CLI::IsMember({"sparse", "dense"}));
  synth->add_option("--planted", sa.planted, "Planted neurons per field (sparse)");
  synth->add_option("--dim", sa.dim, "Total dimension, layers x per-layer");
  synth->add_option("--layers", sa.layers);
  synth->add_option("--per-class", sa.per_class, "Records per class per field");
  synth->add_option("--effect", sa.effect);
  synth->add_option("--noise", sa.noise);
  synth->add_option("--background-nnz", sa.background);
  synth->add_option("--topics", sa.topics);
  synth->add_option("--signal-layers", sa.signal_layers)->delimiter(',');
  synth->add_flag("--shared-direction", sa.shared_direction);
  synth->add_option("--fields", sa.fields)->delimiter(',');
  synth->add_option("--store", sa.store, "Output path (default OUT/synth.cfs1)");

  ProbeArgs pa;
  auto add_probe = [&](CLI::App* s) {
    s->add_option("--store", pa.store, "DenseHidden CFS1 store")->required();
    s->add_option("--train-fraction", pa.train_fraction);
    s->add_option("--split-seed", pa.split_seed, "Defaults to --seed");
    s->add_option("--eval-unit", pa.eval_unit)->check(CLI::IsMember({"token", "reference"}));
    s->add_option("--l2", pa.l2);
    s->add_flag("--no-standardize", pa.no_standardize);
    s->add_option("--max-iterations", pa.max_iterations);
  };
  auto* probe_sweep = sub(app, "probe-sweep", "Per-layer probe AUC for each field");
  add_probe(probe_sweep);
  probe_sweep->add_option("--field", pa.fields)->delimiter(',');
  auto* crossfield = sub(app, "crossfield", "Five-by-five cross-field transfer AUC");
  add_probe(crossfield);

  SelectArgs sel;
  auto add_select = [&](CLI::App* s) {
    s->add_option("--store", sel.store, "SparseCett CFS1 store")->required();
    s->add_option("--field", sel.fields)->delimiter(',');
    s->add_option("--alpha", sel.alpha, "Skip the grid search");
    s->add_option("--grid-lo", sel.grid_lo);
    s->add_option("--grid-hi", sel.grid_hi);
    s->add_option("--grid-points", sel.grid_points);
    s->add_option("--sparsity-penalty", sel.sparsity_penalty);
    s->add_option("--val-fraction", sel.val_fraction);
    s->add_option("--resamples", sel.resamples);
    s->add_option("--subsample", sel.subsample);
    s->add_option("--threshold", sel.threshold);
    s->add_option("--l1-ratio", sel.l1_ratio);
    s->add_option("--learning-rate", sel.learning_rate);
    s->add_option("--epochs", sel.epochs);
    s->add_option("--batch-size", sel.batch_size);
  };
  auto* select = sub(app, "select-neurons", "Elastic-net stability selection of field neurons");
  add_select(select);
  auto* perm = sub(app, "perm-control", "Stability selection under permuted labels");
  add_select(perm);
  perm->add_option("--permutations", sel.permutations);

  StatsArgs st;
  auto* stats = sub(app, "stats", "Statistical tests on CSV tables or inline values");
  stats->require_subcommand(1);
  auto* s_wil = sub(*stats, "wilcoxon", "One-sided signed-rank test on paired deltas");
  s_wil->add_option("--deltas", st.deltas)->delimiter(',')->allow_extra_args(false);
  s_wil->add_option("--csv", st.csv);
  s_wil->add_option("--column", st.column, "Delta column in --csv");
  s_wil->add_option("--direction", st.direction)->check(CLI::IsMember({"less", "greater"}));
  s_wil->add_option("--tie-tolerance", st.tie_tolerance, "Drop |delta| <= this");
  auto* s_kw = sub(*stats, "kruskal", "Kruskal-Wallis H over group,value rows");
  s_kw->add_option("--csv", st.csv)->required();
  auto* s_sp = sub(*stats, "spearman", "Rank correlation of x,y");
  s_sp->add_option("--csv", st.csv);
  s_sp->add_option("--x", st.x)->delimiter(',');
  s_sp->add_option("--y", st.y)->delimiter(',');
  auto* s_fz = sub(*stats, "fisher", "Compare two correlations with Fisher's z");
  s_fz->add_option("--rho1", st.rho1)->required();
  s_fz->add_option("--n1", st.n1)->required();
  s_fz->add_option("--rho2", st.rho2)->required();
  s_fz->add_option("--n2", st.n2)->required();
  auto* s_tv = sub(*stats, "trend-variance", "Permutation test on per-series depth trends");
  s_tv->add_option("--csv", st.csv)->required();
  s_tv->add_option("--permutations", st.permutations);
  auto* s_pk = sub(*stats, "peak-ci", "Bootstrap interval for the peak layer");
  s_pk->add_option("--csv", st.csv)->required();
  s_pk->add_option("--resamples", st.resamples);
  s_pk->add_option("--sigma", st.sigma);
  s_pk->add_flag("--resample-points", st.resample_points);

  PlanArgs pl;
  auto* plan = sub(app, "plan-intervention", "Suppress, enhance and random-control plans");
  plan->add_option("--selections", pl.selections, "fh_neurons_<field>.json files")->required();
  plan->add_option("--betas-suppress", pl.betas_suppress)->delimiter(',');
  plan->add_option("--betas-enhance", pl.betas_enhance)->delimiter(',');
  plan->add_option("--trials", pl.trials, "Random-control trials per field");
  plan->add_option("--n-layers", pl.n_layers);
  plan->add_option("--dim-per-layer", pl.dim_per_layer);

  std::string reports_path;
  AnalysisOptions ao;
  auto* analyze = sub(app, "analyze-intervention", "Paired tests over condition reports");
  analyze->add_option("--reports", reports_path, "JSON array or JSONL of labeled reports incl. a baseline")
      ->required();
  analyze->add_option("--enhance-beta", ao.enhance_beta);
  analyze->add_option("--suppress-beta", ao.suppress_beta);
  analyze->add_option("--tie-tolerance", ao.tie_tolerance_pp);

  PlotArgs pd;
  auto* plot = sub(app, "plot-data", "CSV series for figures");
  plot->add_option("--corpus", pd.corpus);
  plot->add_option("--layer-auc", pd.layer_auc, "layer_auc.json from probe-sweep");
  plot->add_option("--selections", pd.selections);
  plot->add_option("--permutations", pd.permutations);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string command;
  std::string section;
  try {
    std::optional<fs::path> out_dir;
    if (!g.out_dir.empty()) out_dir = fs::path(g.out_dir);
    RunOutput out(out_dir, g.json);
    std::string summary;
    json result;
    auto* chosen = app.get_subcommands().front();
    command = chosen->get_name();
    section = command + ".";
    if (chosen == verify) result = run_verify(va, g, out, summary);
    else if (chosen == aggregate) result = run_aggregate(corpus_path, out, summary);
    else if (chosen == serialize) result = run_serialize(ser_refs, ser_offsets, out, summary);
    else if (chosen == synth) result = run_synth(sa, g, out, summary);
    else if (chosen == probe_sweep) result = run_probe_sweep(pa, g, out, summary);
    else if (chosen == crossfield) result = run_crossfield(pa, g, out, summary);
    else if (chosen == select) result = run_select(sel, g, out, summary);
    else if (chosen == perm) result = run_perm_control(sel, g, out, summary);
    else if (chosen == stats) {
      const std::string test = stats->get_subcommands().front()->get_name();
      command += " " + test;
      section += test + ".";
      result = run_stats(test, st, g, summary);
      out.write_json("stats_" + test + ".json", result);
    } else if (chosen == plan) result = run_plan(pl, g, out, summary);
    else if (chosen == analyze) result = run_analyze(reports_path, ao, out, summary);
    else if (chosen == plot) result = run_plot_data(pd, g, out, summary);
    out.finish(command, result, summary, resolved_config(app.config_to_str(true, false), section));
  } catch (const UsageError& e) {
    std::cerr << "fieldtrace " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "fieldtrace " << command << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fieldtrace " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
