#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <vector>

#include "fieldtrace/elastic_net.hpp"

namespace fieldtrace {

struct AlphaCandidate {
  double alpha = 0.0;
  double val_auc = 0.0;
  std::size_t nnz = 0;
  double score = 0.0;
};

struct AlphaSearch {
  double best_alpha = 0.0;
  std::vector<AlphaCandidate> candidates;  // grid order
};

struct GridOptions {
  double sparsity_penalty = 1.0;  // lambda_s in AUC_val - lambda_s * nnz / p
  double val_fraction = 0.2;      // topics held out for validation
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Log-spaced grid from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

/// Fits each alpha on an inner topic-level train split and scores it on the
/// held-out topics. Ties in score go to the larger alpha.
AlphaSearch alpha_grid_search(const SparseDataset& data, const std::vector<double>& grid,
                              const ElasticNetConfig& base, const GridOptions& opts = {});

struct StabilityConfig {
  int resamples = 20;
  double subsample_ratio = 0.5;
  double threshold = 0.6;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct StableNeuron {
  NeuronId id;
  double frequency = 0.0;
  double mean_weight = 0.0;  // over the resamples that selected it
};

struct SelectionResult {
  FieldKind field = FieldKind::Title;
  double alpha = 0.0;
  double threshold = 0.6;
  int resamples = 0;
  std::uint32_t n_layers = 0;
  std::uint32_t dim_per_layer = 0;
  std::vector<StableNeuron> stable_neurons;  // frequency > threshold
  std::vector<StableNeuron> positive_set;    // mean_weight > 0
  double q = 0.0;                            // mean nnz per resample
  std::uint64_t p = 0;
  double fdr_bound = 0.0;
  double max_frequency = 0.0;  // over all neurons
};

/// q^2 / ((2*threshold - 1) * p). Throws InvalidArgument unless
/// threshold > 0.5 and p > 0.
double fdr_bound(double q, double threshold, double p);

/// Class-stratified subsamples without replacement. Each record's draw key
/// is a hash of (seed, resample, ref_id), so frequencies do not depend on
/// record order.
SelectionResult stability_select(const SparseDataset& data, FieldKind field, double alpha,
                                 const ElasticNetConfig& base, const StabilityConfig& stab);

struct PermutationRun {
  int index = 0;
  std::size_t above_threshold = 0;
  double max_frequency = 0.0;
};

struct PermutationControl {
  std::vector<PermutationRun> runs;
  std::size_t clean_runs = 0;  // runs with no neuron above the threshold
  bool passed = false;         // every run clean
};

/// Reruns stability selection with labels permuted across the whole
/// dataset. permute=false feeds the true labels, as a sanity inversion.
/// Throws InvalidArgument for n_perm < 1.
PermutationControl permutation_control(const SparseDataset& data, FieldKind field, double alpha,
                                       const ElasticNetConfig& base, const StabilityConfig& stab,
                                       int n_perm, bool permute = true);

/// Percentages of the positive set in layers [0, ceil(L/3)),
/// [ceil(L/3), ceil(2L/3)) and the rest. All zero for an empty set.
std::array<double, 3> layer_band_summary(const SelectionResult& result, std::uint32_t n_layers);

nlohmann::json to_json(const SelectionResult& r);
SelectionResult selection_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlphaSearch& s);
nlohmann::json to_json(const PermutationControl& c);

}  // namespace fieldtrace
