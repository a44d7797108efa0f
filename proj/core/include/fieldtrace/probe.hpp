#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fieldtrace/featstore.hpp"
#include "fieldtrace/split.hpp"

namespace fieldtrace {

/// In-memory view of a DenseHidden store grouped by (field, layer). Several
/// records per (ref, field, layer) are token-level instances of one reference.
class DenseCorpus {
 public:
  struct RefInfo {
    std::string ref_id;
    std::int32_t topic = 0;
    std::uint8_t label = 0;
  };
  struct Row {
    std::uint32_t ref = 0;  // index into refs(field)
    const float* data = nullptr;
  };

  /// Throws InvalidArgument for a sparse store and MalformedRecord when the
  /// label or topic of a reference differs between its records.
  DenseCorpus(StoreHeader header, std::vector<FeatureRecord> records);
  static DenseCorpus load(const std::filesystem::path& path);

  std::uint32_t n_layers() const { return header_.n_layers; }
  std::uint32_t hidden() const { return header_.dim_per_layer; }
  const StoreHeader& header() const { return header_; }
  bool has_field(FieldKind f) const { return !refs_[field_index(f)].empty(); }
  const std::vector<RefInfo>& refs(FieldKind f) const { return refs_[field_index(f)]; }
  const std::vector<Row>& rows(FieldKind f, std::uint32_t layer) const;
  std::vector<std::int32_t> topics() const;

 private:
  StoreHeader header_;
  std::vector<FeatureRecord> records_;
  std::array<std::vector<RefInfo>, kFieldCount> refs_;
  std::array<std::vector<std::vector<Row>>, kFieldCount> rows_;  // [field][layer]
};

enum class EvalUnit { Token, Reference };
std::string_view eval_unit_name(EvalUnit u) noexcept;
EvalUnit parse_eval_unit(std::string_view s);

struct ProbeOptions {
  double l2_strength = 1e-2;
  bool balanced_class_weights = true;
  bool standardize = true;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;
};

struct ProbeModel {
  Eigen::VectorXd weights;  // in standardized space when standardize is on
  double bias = 0.0;
  Eigen::VectorXd mean;     // empty when not standardized
  Eigen::VectorXd scale;
  double l2_strength = 0.0;
  std::int32_t layer = -1;
  FieldKind field = FieldKind::Title;
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;

  double score(const float* x) const;
  Eigen::VectorXd score(const Eigen::MatrixXd& X) const;
  /// Weights mapped back to raw feature space.
  Eigen::VectorXd raw_weights() const;
};

/// Class-weighted mean logistic loss + (l2/2)||w||^2 over parameters
/// [w..., b]; the bias is not penalized. Returns the value and fills `grad`
/// (size d + 1) when non-null.
double probe_objective(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
                       const Eigen::VectorXd& sample_weight, double l2,
                       const Eigen::VectorXd& params, Eigen::VectorXd* grad);

/// Balanced weights n / (2 n_c), or all ones.
Eigen::VectorXd class_weights(const std::vector<std::uint8_t>& y, bool balanced);

/// LBFGS fit. Throws SingleClass (< 2 examples per class) and NonFinite.
ProbeModel train_probe(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
                       const ProbeOptions& opts = {});

struct ProbeTaskOptions {
  ProbeOptions probe;
  EvalUnit eval_unit = EvalUnit::Reference;
  std::uint64_t seed = 0;  // balancing seed
  unsigned jobs = 1;
};

struct LayerAuc {
  std::uint32_t layer = 0;
  double auc = 0.0;
  std::size_t n_train = 0;  // training rows
  std::size_t n_test = 0;   // evaluated units
  bool converged = false;
};

/// One probe per layer, trained on train topics and scored on test topics.
std::vector<LayerAuc> layer_sweep(const DenseCorpus& corpus, FieldKind field,
                                  const SplitPlan& split, const ProbeTaskOptions& opts = {});

struct AucMatrix {
  std::array<std::array<double, kFieldCount>, kFieldCount> auc{};  // [train][eval]
  std::array<std::uint32_t, kFieldCount> layer{};                  // source probe layer
};

/// Throws MissingField unless all five fields are present.
AucMatrix cross_field_matrix(const DenseCorpus& corpus, const SplitPlan& split,
                             const ProbeTaskOptions& opts = {});

nlohmann::json to_json(const SplitPlan& plan);
nlohmann::json layer_auc_json(FieldKind field, const std::vector<LayerAuc>& sweep);
nlohmann::json to_json(const AucMatrix& m);
std::string layer_auc_csv(FieldKind field, const std::vector<LayerAuc>& sweep, bool header = true);
std::string crossfield_csv(const AucMatrix& m);

}  // namespace fieldtrace
