#include "fieldtrace/neuronsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "fieldtrace/auc.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"
#include "fieldtrace/parallel.hpp"
#include "fieldtrace/split.hpp"

namespace fieldtrace {

using nlohmann::json;

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1)
    throw Error(Errc::InvalidArgument, "log_grid needs 0 < lo <= hi and points >= 1");
  if (points == 1) return {lo};
  std::vector<double> out;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
  return out;
}

AlphaSearch alpha_grid_search(const SparseDataset& data, const std::vector<double>& grid,
                              const ElasticNetConfig& base, const GridOptions& opts) {
  if (grid.empty()) throw Error(Errc::InvalidArgument, "alpha grid is empty");
  const auto split = make_split(data.topic, 1.0 - opts.val_fraction, derive_seed(opts.seed, 0xa1));
  std::vector<std::size_t> train_rows, val_rows;
  for (std::size_t i = 0; i < data.size(); ++i)
    (split.is_train(data.topic[i]) ? train_rows : val_rows).push_back(i);
  const SparseDataset train = data.subset(train_rows);
  const SparseDataset val = data.subset(val_rows);

  AlphaSearch out;
  out.candidates.resize(grid.size());
  parallel_for(grid.size(), opts.jobs, [&](std::size_t g) {
    ElasticNetConfig cfg = base;
    cfg.alpha = grid[g];
    const auto model = fit_elastic_net(train, cfg);
    std::vector<double> scores;
    scores.reserve(val.size());
    for (const auto& x : val.x) scores.push_back(model.score(x));
    AlphaCandidate& c = out.candidates[g];
    c.alpha = grid[g];
    c.val_auc = auc(scores, val.y);
    c.nnz = model.nnz();
    c.score = c.val_auc - opts.sparsity_penalty * static_cast<double>(c.nnz) / data.dim;
  });
  const AlphaCandidate* best = &out.candidates.front();
  for (const auto& c : out.candidates)
    if (c.score > best->score + 1e-12 ||
        (std::abs(c.score - best->score) <= 1e-12 && c.alpha > best->alpha))
      best = &c;
  out.best_alpha = best->alpha;
  return out;
}

double fdr_bound(double q, double threshold, double p) {
  if (!(threshold > 0.5 && threshold <= 1.0))
    throw Error(Errc::InvalidArgument, "FDR bound needs threshold in (0.5, 1]");
  if (!(p > 0.0)) throw Error(Errc::InvalidArgument, "FDR bound needs p > 0");
  return q * q / ((2.0 * threshold - 1.0) * p);
}

namespace {

void check_stability(const StabilityConfig& stab) {
  if (stab.resamples < 1) throw Error(Errc::InvalidArgument, "resamples must be >= 1");
  if (!(stab.subsample_ratio > 0.0 && stab.subsample_ratio <= 1.0))
    throw Error(Errc::InvalidArgument, "subsample ratio must be in (0, 1]");
  if (!(stab.threshold > 0.5 && stab.threshold <= 1.0))
    throw Error(Errc::InvalidArgument, "selection threshold must be in (0.5, 1]");
}

// Rows of one resample, ordered by their draw key so the fit sees the same
// sequence whatever the input order.
std::vector<std::size_t> draw_resample(const SparseDataset& data, std::uint64_t key_seed,
                                       double ratio) {
  std::array<std::vector<std::pair<std::uint64_t, std::size_t>>, 2> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint64_t key = mix64(fnv1a64(data.ref_id[i], key_seed));
    by_class[data.y[i] ? 1 : 0].emplace_back(key, i);
  }
  std::vector<std::pair<std::uint64_t, std::size_t>> picked;
  for (auto& cls : by_class) {
    const auto m = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(cls.size())));
    if (m == 0) throw Error(Errc::SingleClass, "subsample would contain a single class");
    std::partial_sort(cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(m), cls.end(),
                      [&](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first < b.first
                                                  : data.ref_id[a.second] < data.ref_id[b.second];
                      });
    picked.insert(picked.end(), cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(m));
  }
  std::sort(picked.begin(), picked.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : data.ref_id[a.second] < data.ref_id[b.second];
  });
  std::vector<std::size_t> rows;
  rows.reserve(picked.size());
  for (const auto& p : picked) rows.push_back(p.second);
  return rows;
}

}  // namespace

SelectionResult stability_select(const SparseDataset& data, FieldKind field, double alpha,
                                 const ElasticNetConfig& base, const StabilityConfig& stab) {
  check_stability(stab);
  std::vector<SparseLinearModel> fits(static_cast<std::size_t>(stab.resamples));
  parallel_for(fits.size(), stab.jobs, [&](std::size_t b) {
    const std::uint64_t key_seed = derive_seed(stab.seed, 0x5e1ec7000 + b);
    const auto rows = draw_resample(data, key_seed, stab.subsample_ratio);
    ElasticNetConfig cfg = base;
    cfg.alpha = alpha;
    cfg.seed = derive_seed(stab.seed, 0xf17000 + b);
    fits[b] = fit_elastic_net(data.subset(rows), cfg);
  });

  struct Tally {
    int count = 0;
    double weight_sum = 0.0;
  };
  std::unordered_map<std::uint32_t, Tally> tally;
  double nnz_sum = 0.0;
  for (const auto& m : fits) {
    nnz_sum += static_cast<double>(m.nnz());
    for (std::size_t k = 0; k < m.nnz(); ++k) {
      auto& t = tally[m.index[k]];
      ++t.count;
      t.weight_sum += m.weight[k];
    }
  }

  SelectionResult r;
  r.field = field;
  r.alpha = alpha;
  r.threshold = stab.threshold;
  r.resamples = stab.resamples;
  r.n_layers = data.n_layers;
  r.dim_per_layer = data.dim_per_layer;
  r.p = data.dim;
  r.q = nnz_sum / stab.resamples;
  r.fdr_bound = fdr_bound(r.q, stab.threshold, static_cast<double>(r.p));

  std::vector<std::uint32_t> keys;
  keys.reserve(tally.size());
  for (const auto& [j, t] : tally) keys.push_back(j);
  std::sort(keys.begin(), keys.end());
  for (auto j : keys) {
    const auto& t = tally[j];
    const double freq = static_cast<double>(t.count) / stab.resamples;
    r.max_frequency = std::max(r.max_frequency, freq);
    if (!(freq > stab.threshold)) continue;
    StableNeuron s;
    s.id = data.dim_per_layer ? unflatten(j, data.dim_per_layer) : NeuronId{0, j};
    s.frequency = freq;
    s.mean_weight = t.weight_sum / t.count;
    r.stable_neurons.push_back(s);
    if (s.mean_weight > 0.0) r.positive_set.push_back(s);
  }
  return r;
}

PermutationControl permutation_control(const SparseDataset& data, FieldKind field, double alpha,
                                       const ElasticNetConfig& base, const StabilityConfig& stab,
                                       int n_perm, bool permute) {
  if (n_perm < 1) throw Error(Errc::InvalidArgument, "permutation control needs n_perm >= 1");
  PermutationControl out;
  for (int k = 0; k < n_perm; ++k) {
    SparseDataset shuffled = data;
    if (permute) {
      std::mt19937_64 rng(derive_seed(stab.seed, 0x9e4700 + static_cast<std::uint64_t>(k)));
      std::shuffle(shuffled.y.begin(), shuffled.y.end(), rng);
    }
    StabilityConfig s = stab;
    s.seed = derive_seed(stab.seed, 0x9e4800 + static_cast<std::uint64_t>(k));
    const auto r = stability_select(shuffled, field, alpha, base, s);
    PermutationRun run;
    run.index = k;
    run.above_threshold = r.stable_neurons.size();
    run.max_frequency = r.max_frequency;
    if (run.above_threshold == 0) ++out.clean_runs;
    out.runs.push_back(run);
  }
  out.passed = out.clean_runs == out.runs.size();
  return out;
}

std::array<double, 3> layer_band_summary(const SelectionResult& result, std::uint32_t n_layers) {
  std::array<double, 3> pct{0.0, 0.0, 0.0};
  if (result.positive_set.empty() || n_layers == 0) return pct;
  const std::uint32_t b1 = (n_layers + 2) / 3;
  const std::uint32_t b2 = (2 * n_layers + 2) / 3;
  for (const auto& s : result.positive_set) {
    const int band = s.id.layer < b1 ? 0 : (s.id.layer < b2 ? 1 : 2);
    pct[static_cast<std::size_t>(band)] += 1.0;
  }
  for (auto& v : pct) v = 100.0 * v / static_cast<double>(result.positive_set.size());
  return pct;
}

namespace {

json neurons_json(const std::vector<StableNeuron>& v) {
  json arr = json::array();
  for (const auto& s : v)
    arr.push_back({{"layer", s.id.layer},
                   {"neuron", s.id.neuron},
                   {"frequency", s.frequency},
                   {"mean_weight", s.mean_weight}});
  return arr;
}

std::vector<StableNeuron> neurons_from_json(const json& arr) {
  std::vector<StableNeuron> out;
  for (const auto& e : arr) {
    StableNeuron s;
    s.id.layer = e.at("layer").get<std::uint32_t>();
    s.id.neuron = e.at("neuron").get<std::uint32_t>();
    s.frequency = e.at("frequency").get<double>();
    s.mean_weight = e.at("mean_weight").get<double>();
    out.push_back(s);
  }
  return out;
}

}  // namespace

json to_json(const SelectionResult& r) {
  return json{{"field", field_name(r.field)},
              {"alpha", r.alpha},
              {"threshold", r.threshold},
              {"resamples", r.resamples},
              {"n_layers", r.n_layers},
              {"dim_per_layer", r.dim_per_layer},
              {"q", r.q},
              {"p", r.p},
              {"fdr_bound", r.fdr_bound},
              {"max_frequency", r.max_frequency},
              {"stable_neurons", neurons_json(r.stable_neurons)},
              {"positive_set", neurons_json(r.positive_set)}};
}

SelectionResult selection_from_json(const json& j) {
  try {
    SelectionResult r;
    r.field = parse_field(j.at("field").get<std::string>());
    r.alpha = j.value("alpha", 0.0);
    r.threshold = j.value("threshold", 0.6);
    r.resamples = j.value("resamples", 0);
    r.n_layers = j.value("n_layers", 0u);
    r.dim_per_layer = j.value("dim_per_layer", 0u);
    r.q = j.value("q", 0.0);
    r.p = j.value("p", std::uint64_t{0});
    r.fdr_bound = j.value("fdr_bound", 0.0);
    r.max_frequency = j.value("max_frequency", 0.0);
    r.stable_neurons = neurons_from_json(j.value("stable_neurons", json::array()));
    r.positive_set = neurons_from_json(j.at("positive_set"));
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("selection result: ") + e.what());
  }
}

json to_json(const AlphaSearch& s) {
  json arr = json::array();
  for (const auto& c : s.candidates)
    arr.push_back({{"alpha", c.alpha}, {"val_auc", c.val_auc}, {"nnz", c.nnz}, {"score", c.score}});
  return json{{"best_alpha", s.best_alpha}, {"candidates", arr}};
}

json to_json(const PermutationControl& c) {
  json runs = json::array();
  for (const auto& r : c.runs)
    runs.push_back({{"index", r.index},
                    {"above_threshold", r.above_threshold},
                    {"max_frequency", r.max_frequency}});
  return json{{"runs", runs}, {"clean_runs", c.clean_runs}, {"passed", c.passed}};
}

}  // namespace fieldtrace
