#include "fieldtrace/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_set>

#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"

namespace fieldtrace {

using nlohmann::json;

namespace {

std::string synth_ref_id(std::uint32_t topic, std::uint32_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn-t%02u-%05u", topic, i);
  return buf;
}

// Exactly records_per_class positives per field, independent across fields.
std::vector<std::uint8_t> balanced_labels(std::uint32_t per_class, std::mt19937_64& rng) {
  std::vector<std::uint8_t> labels(2 * per_class, 0);
  std::fill(labels.begin(), labels.begin() + per_class, 1);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

json truth_to_json(const SynthTruth& t) {
  json planted = json::object();
  json dirs = json::object();
  for (auto f : kAllFields) {
    if (!t.planted[field_index(f)].empty())
      planted[std::string(field_name(f))] = t.planted[field_index(f)];
    if (!t.directions[field_index(f)].empty())
      dirs[std::string(field_name(f))] = t.directions[field_index(f)];
  }
  return json{{"planted", planted}, {"directions", dirs}, {"signal_layers", t.signal_layers}};
}

void check_fields(const std::vector<FieldKind>& fields) {
  if (fields.empty()) throw Error(Errc::ConfigContradiction, "no fields requested");
  std::vector<FieldKind> sorted = fields;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(Errc::ConfigContradiction, "duplicate field in config");
}

}  // namespace

SynthStore synth_sparse(const SparseSynthConfig& cfg, std::uint64_t seed) {
  check_fields(cfg.fields);
  const std::uint64_t total = std::uint64_t{cfg.n_layers} * cfg.dim_per_layer;
  if (total == 0 || total > UINT32_MAX)
    throw Error(Errc::ConfigContradiction, "dimension must be in [1, 2^32)");
  if (std::uint64_t{cfg.planted_per_field} * cfg.fields.size() + cfg.background_nnz > total)
    throw Error(Errc::ConfigContradiction, "planted + background coordinates exceed dimension");
  if (cfg.records_per_class == 0 || cfg.n_topics == 0)
    throw Error(Errc::ConfigContradiction, "records_per_class and n_topics must be positive");
  if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.effect))
    throw Error(Errc::ConfigContradiction, "noise must be >= 0 and effect finite");

  std::mt19937_64 rng(derive_seed(seed, 1));
  SynthStore out;
  out.header.kind = StoreKind::SparseCett;
  out.header.n_layers = cfg.n_layers;
  out.header.dim_per_layer = cfg.dim_per_layer;

  std::uniform_int_distribution<std::uint32_t> any_index(0, static_cast<std::uint32_t>(total - 1));
  std::unordered_set<std::uint32_t> used;
  for (auto f : cfg.fields) {
    auto& planted = out.truth.planted[field_index(f)];
    while (planted.size() < cfg.planted_per_field) {
      auto idx = any_index(rng);
      if (used.insert(idx).second) planted.push_back(idx);
    }
    std::sort(planted.begin(), planted.end());
  }

  std::normal_distribution<double> unit(0.0, 1.0);
  auto folded = [&](double mean) {
    return static_cast<float>(std::abs(mean + cfg.noise * unit(rng)));
  };

  const std::uint32_t n_refs = 2 * cfg.records_per_class;
  std::vector<std::vector<std::uint8_t>> labels;
  for (std::size_t fi = 0; fi < cfg.fields.size(); ++fi)
    labels.push_back(balanced_labels(cfg.records_per_class, rng));

  std::vector<std::pair<std::uint32_t, float>> coords;
  std::unordered_set<std::uint32_t> seen;
  for (std::uint32_t i = 0; i < n_refs; ++i) {
    const std::uint32_t topic = i % cfg.n_topics;
    for (std::size_t fi = 0; fi < cfg.fields.size(); ++fi) {
      const FieldKind f = cfg.fields[fi];
      FeatureRecord rec;
      rec.ref_id = synth_ref_id(topic, i);
      rec.field = f;
      rec.label = labels[fi][i];
      rec.topic_id = static_cast<std::int32_t>(topic);
      rec.layer = -1;
      coords.clear();
      seen.clear();
      for (auto idx : out.truth.planted[field_index(f)]) {
        coords.emplace_back(idx, folded(rec.label ? cfg.effect : 0.0));
        seen.insert(idx);
      }
      while (coords.size() < cfg.planted_per_field + cfg.background_nnz) {
        auto idx = any_index(rng);
        if (seen.insert(idx).second) coords.emplace_back(idx, folded(0.0));
      }
      std::sort(coords.begin(), coords.end());
      for (const auto& [idx, v] : coords) {
        if (v == 0.0f) continue;
        rec.sparse.index.push_back(idx);
        rec.sparse.value.push_back(v);
      }
      out.records.push_back(std::move(rec));
    }
  }
  out.header.record_count = out.records.size();
  out.header.metadata = json{{"generator", "synth_sparse"},
                             {"seed", seed},
                             {"effect", cfg.effect},
                             {"noise", cfg.noise},
                             {"records_per_class", cfg.records_per_class},
                             {"background_nnz", cfg.background_nnz},
                             {"truth", truth_to_json(out.truth)}}
                            .dump();
  return out;
}

SynthStore synth_dense(const DenseSynthConfig& cfg, std::uint64_t seed) {
  check_fields(cfg.fields);
  if (cfg.n_layers == 0 || cfg.hidden == 0 || cfg.records_per_class == 0 || cfg.n_topics == 0)
    throw Error(Errc::ConfigContradiction, "dimensions and counts must be positive");
  const std::uint32_t block = cfg.shared_direction ? cfg.hidden : cfg.hidden / kFieldCount;
  if (block == 0)
    throw Error(Errc::ConfigContradiction, "hidden size too small for one subspace per field");
  for (auto l : cfg.signal_layers)
    if (l >= cfg.n_layers) throw Error(Errc::ConfigContradiction, "signal layer out of range");

  std::mt19937_64 rng(derive_seed(seed, 2));
  std::normal_distribution<double> unit(0.0, 1.0);
  SynthStore out;
  out.header.kind = StoreKind::DenseHidden;
  out.header.n_layers = cfg.n_layers;
  out.header.dim_per_layer = cfg.hidden;
  out.truth.signal_layers = cfg.signal_layers;
  if (out.truth.signal_layers.empty()) {
    out.truth.signal_layers.resize(cfg.n_layers);
    std::iota(out.truth.signal_layers.begin(), out.truth.signal_layers.end(), 0u);
  }
  std::vector<bool> has_signal(cfg.n_layers, false);
  for (auto l : out.truth.signal_layers) has_signal[l] = true;

  // Directions: disjoint coordinate blocks per field code, so they are
  // mutually orthogonal; or one shared direction.
  std::vector<float> shared;
  for (auto f : cfg.fields) {
    auto& dir = out.truth.directions[field_index(f)];
    if (cfg.shared_direction && !shared.empty()) {
      dir = shared;
      continue;
    }
    dir.assign(cfg.hidden, 0.0f);
    const std::uint32_t begin = cfg.shared_direction ? 0 : static_cast<std::uint32_t>(field_index(f)) * block;
    double norm = 0.0;
    std::vector<double> raw(block);
    for (auto& v : raw) {
      v = unit(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::uint32_t k = 0; k < block; ++k) dir[begin + k] = static_cast<float>(raw[k] / norm);
    if (cfg.shared_direction) shared = dir;
  }

  const std::uint32_t n_refs = 2 * cfg.records_per_class;
  std::vector<std::vector<std::uint8_t>> labels;
  for (std::size_t fi = 0; fi < cfg.fields.size(); ++fi)
    labels.push_back(balanced_labels(cfg.records_per_class, rng));

  for (std::uint32_t i = 0; i < n_refs; ++i) {
    const std::uint32_t topic = i % cfg.n_topics;
    for (std::size_t fi = 0; fi < cfg.fields.size(); ++fi) {
      const FieldKind f = cfg.fields[fi];
      const auto& dir = out.truth.directions[field_index(f)];
      for (std::uint32_t l = 0; l < cfg.n_layers; ++l) {
        FeatureRecord rec;
        rec.ref_id = synth_ref_id(topic, i);
        rec.field = f;
        rec.label = labels[fi][i];
        rec.topic_id = static_cast<std::int32_t>(topic);
        rec.layer = static_cast<std::int32_t>(l);
        rec.dense.resize(cfg.hidden);
        const double shift = (rec.label && has_signal[l]) ? cfg.effect : 0.0;
        for (std::uint32_t k = 0; k < cfg.hidden; ++k)
          rec.dense[k] = static_cast<float>(cfg.noise * unit(rng) + shift * dir[k]);
        out.records.push_back(std::move(rec));
      }
    }
  }
  out.header.record_count = out.records.size();
  out.header.metadata = json{{"generator", "synth_dense"},
                             {"seed", seed},
                             {"effect", cfg.effect},
                             {"noise", cfg.noise},
                             {"records_per_class", cfg.records_per_class},
                             {"shared_direction", cfg.shared_direction},
                             {"truth", truth_to_json(out.truth)}}
                            .dump();
  return out;
}

SynthTruth truth_from_metadata(const std::string& metadata) {
  SynthTruth t;
  json j;
  try {
    j = json::parse(metadata);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedJson, std::string("store metadata: ") + e.what());
  }
  if (!j.contains("truth")) throw Error(Errc::MissingField, "store metadata has no ground truth");
  const auto& tj = j["truth"];
  for (auto f : kAllFields) {
    const std::string key(field_name(f));
    if (tj.contains("planted") && tj["planted"].contains(key))
      t.planted[field_index(f)] = tj["planted"][key].get<std::vector<std::uint32_t>>();
    if (tj.contains("directions") && tj["directions"].contains(key))
      t.directions[field_index(f)] = tj["directions"][key].get<std::vector<float>>();
  }
  if (tj.contains("signal_layers"))
    t.signal_layers = tj["signal_layers"].get<std::vector<std::uint32_t>>();
  return t;
}

}  // namespace fieldtrace
