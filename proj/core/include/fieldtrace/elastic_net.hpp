#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldtrace/featstore.hpp"

namespace fieldtrace {

/// One field's pooled CETT vectors, one row per reference.
struct SparseDataset {
  std::uint32_t dim = 0;  // candidate count p
  std::uint32_t n_layers = 0;
  std::uint32_t dim_per_layer = 0;
  std::vector<SparseVector> x;
  std::vector<std::uint8_t> y;
  std::vector<std::int32_t> topic;
  std::vector<std::string> ref_id;

  std::size_t size() const { return y.size(); }
  SparseDataset subset(const std::vector<std::size_t>& rows) const;
};

/// Rows of `field` from a SparseCett store. Throws InvalidArgument for a
/// dense store and MissingField when the field has no records.
SparseDataset sparse_dataset(const StoreHeader& header, const std::vector<FeatureRecord>& records,
                             FieldKind field);

double soft_threshold(double w, double t);

struct ElasticNetConfig {
  double alpha = 1e-3;
  double l1_ratio = 0.8;
  double learning_rate = 0.05;
  int epochs = 50;
  int batch_size = 256;
  std::uint64_t seed = 0;
  bool auto_halving = true;
  int max_halvings = 10;
};

struct SparseLinearModel {
  std::vector<std::uint32_t> index;  // non-zero weights, increasing index
  std::vector<double> weight;
  double bias = 0.0;
  std::size_t nnz() const { return index.size(); }

  double score(const SparseVector& x) const;
};

struct FitDiagnostics {
  std::vector<double> epoch_objective;  // after each accepted epoch
  int halvings = 0;
  double final_learning_rate = 0.0;
  bool stalled = false;  // stopped early after max_halvings
};

/// Mean BCE + alpha*r*||w||_1 + alpha*(1-r)/2*||w||^2 at (w, b).
double elastic_net_objective(const SparseDataset& data, const std::vector<double>& w, double b,
                             double alpha, double l1_ratio);

/// Gradient of the smooth part (mean BCE + alpha*(1-r)/2*||w||^2); `grad_w`
/// is resized to data.dim. Returns the smooth objective.
double elastic_net_smooth_gradient(const SparseDataset& data, const std::vector<double>& w,
                                   double b, double alpha, double l1_ratio,
                                   std::vector<double>& grad_w, double& grad_b);

/// Proximal mini-batch SGD: each step takes the gradient of BCE plus
/// alpha(1-r)w, then soft-thresholds at learning_rate*alpha*r. With
/// auto_halving an epoch that raises the objective is undone and retried at
/// half the rate; once max_halvings is spent the fit stops at the last
/// accepted epoch. Throws SingleClass, InvalidArgument and Divergence.
SparseLinearModel fit_elastic_net(const SparseDataset& data, const ElasticNetConfig& cfg,
                                  FitDiagnostics* diagnostics = nullptr);

}  // namespace fieldtrace
