#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fieldtrace/featstore.hpp"

// Planted-signal generators for desk-scale testing of the probe and
// neuron-selection pipelines. Deterministic for a given (config, seed).
namespace fieldtrace {

struct SparseSynthConfig {
  std::uint32_t n_layers = 64;
  std::uint32_t dim_per_layer = 3125;  // 64 x 3125 = 200,000
  std::uint32_t planted_per_field = 20;
  double effect = 2.0;  // hallucinated planted coords ~ |N(effect, noise)|
  double noise = 0.3;   // correct planted and background coords ~ |N(0, noise)|
  std::uint32_t records_per_class = 400;
  std::uint32_t background_nnz = 200;  // random non-zero coordinates per record
  std::vector<FieldKind> fields{kAllFields.begin(), kAllFields.end()};
  std::uint32_t n_topics = 50;
};

struct DenseSynthConfig {
  std::uint32_t n_layers = 8;
  std::uint32_t hidden = 64;
  std::vector<std::uint32_t> signal_layers;  // empty: every layer carries signal
  double effect = 2.5;  // hallucinated records shifted by effect * direction
  double noise = 1.0;   // isotropic Gaussian
  std::uint32_t records_per_class = 1000;
  std::vector<FieldKind> fields{kAllFields.begin(), kAllFields.end()};
  bool shared_direction = false;  // one direction for every field
  std::uint32_t n_topics = 50;
};

/// Ground truth, also embedded as JSON in the store header metadata.
struct SynthTruth {
  std::array<std::vector<std::uint32_t>, kFieldCount> planted;  // sorted flat indices
  std::array<std::vector<float>, kFieldCount> directions;        // unit vectors (dense)
  std::vector<std::uint32_t> signal_layers;
};

struct SynthStore {
  StoreHeader header;
  std::vector<FeatureRecord> records;
  SynthTruth truth;
};

/// Throws Error(ConfigContradiction) when the planted sets cannot fit.
SynthStore synth_sparse(const SparseSynthConfig& config, std::uint64_t seed);
SynthStore synth_dense(const DenseSynthConfig& config, std::uint64_t seed);

/// Parses the "truth" object a generator wrote into StoreHeader::metadata.
SynthTruth truth_from_metadata(const std::string& metadata);

}  // namespace fieldtrace
