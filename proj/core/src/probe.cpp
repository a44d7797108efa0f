#include "fieldtrace/probe.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "fieldtrace/auc.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"
#include "fieldtrace/parallel.hpp"

namespace fieldtrace {

using nlohmann::json;

DenseCorpus::DenseCorpus(StoreHeader header, std::vector<FeatureRecord> records)
    : header_(std::move(header)), records_(std::move(records)) {
  if (header_.kind != StoreKind::DenseHidden)
    throw Error(Errc::InvalidArgument, "probe input must be a DenseHidden store");
  std::array<std::unordered_map<std::string, std::uint32_t>, kFieldCount> index;
  for (auto& layers : rows_) layers.resize(header_.n_layers);
  for (const auto& rec : records_) {
    validate_record(header_, rec);
    const auto fi = field_index(rec.field);
    auto [it, inserted] =
        index[fi].try_emplace(rec.ref_id, static_cast<std::uint32_t>(refs_[fi].size()));
    if (inserted) {
      refs_[fi].push_back({rec.ref_id, rec.topic_id, rec.label});
    } else {
      const auto& info = refs_[fi][it->second];
      if (info.label != rec.label || info.topic != rec.topic_id)
        throw Error(Errc::MalformedRecord,
                    "inconsistent label or topic for " + rec.ref_id + " / " +
                        std::string(field_name(rec.field)));
    }
    rows_[fi][static_cast<std::size_t>(rec.layer)].push_back({it->second, rec.dense.data()});
  }
}

DenseCorpus DenseCorpus::load(const std::filesystem::path& path) {
  StoreHeader header;
  auto records = read_store(path, &header);
  return DenseCorpus(std::move(header), std::move(records));
}

const std::vector<DenseCorpus::Row>& DenseCorpus::rows(FieldKind f, std::uint32_t layer) const {
  if (layer >= header_.n_layers) throw Error(Errc::InvalidArgument, "layer out of range");
  return rows_[field_index(f)][layer];
}

std::vector<std::int32_t> DenseCorpus::topics() const {
  std::vector<std::int32_t> out;
  for (const auto& refs : refs_)
    for (const auto& r : refs) out.push_back(r.topic);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string_view eval_unit_name(EvalUnit u) noexcept {
  return u == EvalUnit::Token ? "token" : "reference";
}

EvalUnit parse_eval_unit(std::string_view s) {
  if (s == "token") return EvalUnit::Token;
  if (s == "reference") return EvalUnit::Reference;
  throw Error(Errc::InvalidArgument, "unknown eval unit: " + std::string(s));
}

double ProbeModel::score(const float* x) const {
  double z = bias;
  const auto d = weights.size();
  if (mean.size() == d) {
    for (Eigen::Index k = 0; k < d; ++k) z += weights[k] * ((x[k] - mean[k]) / scale[k]);
  } else {
    for (Eigen::Index k = 0; k < d; ++k) z += weights[k] * x[k];
  }
  return z;
}

Eigen::VectorXd ProbeModel::score(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd w = raw_weights();
  double b = bias;
  if (mean.size() == weights.size()) b -= w.dot(mean);
  return (X * w).array() + b;
}

Eigen::VectorXd ProbeModel::raw_weights() const {
  if (mean.size() != weights.size()) return weights;
  return weights.cwiseQuotient(scale);
}

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

class ProbeCost final : public ceres::FirstOrderFunction {
 public:
  ProbeCost(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
            const Eigen::VectorXd& sw, double l2)
      : X_(X), y_(y), sw_(sw), l2_(l2) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Index d = X_.cols();
    Eigen::Map<const Eigen::VectorXd> p(parameters, d + 1);
    Eigen::VectorXd g;
    *cost = probe_objective(X_, y_, sw_, l2_, p, gradient ? &g : nullptr);
    if (gradient) Eigen::Map<Eigen::VectorXd>(gradient, d + 1) = g;
    return std::isfinite(*cost);
  }
  int NumParameters() const override { return static_cast<int>(X_.cols() + 1); }

 private:
  const Eigen::MatrixXd& X_;
  const std::vector<std::uint8_t>& y_;
  const Eigen::VectorXd& sw_;
  double l2_;
};

}  // namespace

double probe_objective(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
                       const Eigen::VectorXd& sample_weight, double l2,
                       const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
  const Eigen::Index n = X.rows(), d = X.cols();
  if (params.size() != d + 1 || static_cast<Eigen::Index>(y.size()) != n ||
      sample_weight.size() != n)
    throw Error(Errc::InvalidArgument, "probe_objective: shape mismatch");
  const auto w = params.head(d);
  const double b = params[d];
  const Eigen::VectorXd z = (X * w).array() + b;
  double loss = 0.0;
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool pos = y[static_cast<std::size_t>(i)] != 0;
    loss += sample_weight[i] * softplus(pos ? -z[i] : z[i]);
    resid[i] = sample_weight[i] * (sigmoid(z[i]) - (pos ? 1.0 : 0.0));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double value = loss * inv_n + 0.5 * l2 * w.squaredNorm();
  if (grad) {
    grad->resize(d + 1);
    grad->head(d) = X.transpose() * resid * inv_n + l2 * w;
    (*grad)[d] = resid.sum() * inv_n;
  }
  return value;
}

Eigen::VectorXd class_weights(const std::vector<std::uint8_t>& y, bool balanced) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!balanced) return w;
  double n_pos = 0;
  for (auto v : y) n_pos += (v != 0);
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::SingleClass, "class weights need both classes");
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = static_cast<double>(n) / (2.0 * (y[static_cast<std::size_t>(i)] ? n_pos : n_neg));
  return w;
}

ProbeModel train_probe(const Eigen::MatrixXd& X_raw, const std::vector<std::uint8_t>& y,
                       const ProbeOptions& opts) {
  if (static_cast<Eigen::Index>(y.size()) != X_raw.rows())
    throw Error(Errc::InvalidArgument, "train_probe: rows and labels differ");
  std::size_t n_pos = 0;
  for (auto v : y) n_pos += (v != 0);
  if (n_pos < 2 || y.size() - n_pos < 2)
    throw Error(Errc::SingleClass, "train_probe needs at least 2 examples per class");
  if (!X_raw.allFinite()) throw Error(Errc::NonFinite, "train_probe: non-finite features");

  ProbeModel model;
  model.l2_strength = opts.l2_strength;
  Eigen::MatrixXd X = X_raw;
  if (opts.standardize) {
    model.mean = X.colwise().mean().transpose();
    X.rowwise() -= model.mean.transpose();
    model.scale = (X.colwise().squaredNorm() / static_cast<double>(X.rows())).cwiseSqrt().transpose();
    for (Eigen::Index k = 0; k < model.scale.size(); ++k)
      if (!(model.scale[k] > 1e-12)) model.scale[k] = 1.0;
    X = X * model.scale.cwiseInverse().asDiagonal();
  }
  const Eigen::VectorXd sw = class_weights(y, opts.balanced_class_weights);

  Eigen::VectorXd params = Eigen::VectorXd::Zero(X.cols() + 1);
  ceres::GradientProblem problem(new ProbeCost(X, y, sw, opts.l2_strength));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_num_iterations = opts.max_iterations;
  options.gradient_tolerance = opts.gradient_tolerance;
  options.function_tolerance = 1e-15;
  options.parameter_tolerance = 1e-15;
  options.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, params.data(), &summary);

  model.final_objective = summary.final_cost;
  if (!params.allFinite() || !std::isfinite(summary.final_cost)) {
    std::ostringstream msg;
    msg << "probe training produced a non-finite objective after " << summary.iterations.size()
        << " iterations: " << summary.message;
    throw Error(Errc::NonFinite, msg.str());
  }
  model.weights = params.head(X.cols());
  model.bias = params[X.cols()];
  model.iterations = static_cast<int>(summary.iterations.size());
  model.converged = summary.termination_type == ceres::CONVERGENCE;
  return model;
}

namespace {

// Balanced reference indices for one field on one side of the split.
std::vector<std::uint32_t> partition_refs(const DenseCorpus& corpus, FieldKind field,
                                          const SplitPlan& split, bool train, std::uint64_t seed) {
  const auto& refs = corpus.refs(field);
  std::vector<std::uint32_t> members;
  std::vector<std::uint8_t> labels;
  for (std::uint32_t i = 0; i < refs.size(); ++i) {
    if (train ? split.is_train(refs[i].topic) : split.is_test(refs[i].topic)) {
      members.push_back(i);
      labels.push_back(refs[i].label);
    }
  }
  const auto keep = balance_classes(labels, derive_seed(seed, (field_index(field) << 1) | train));
  std::vector<std::uint32_t> out;
  out.reserve(keep.size());
  for (auto k : keep) out.push_back(members[k]);
  return out;
}

struct Design {
  Eigen::MatrixXd X;
  std::vector<std::uint8_t> y;
  std::vector<std::uint32_t> ref;  // reference index per row
};

Design gather(const DenseCorpus& corpus, FieldKind field, std::uint32_t layer,
              const std::vector<std::uint32_t>& refs) {
  std::vector<char> member(corpus.refs(field).size(), 0);
  for (auto r : refs) member[r] = 1;
  const auto& rows = corpus.rows(field, layer);
  std::size_t n = 0;
  for (const auto& row : rows) n += member[row.ref];
  Design d;
  d.X.resize(static_cast<Eigen::Index>(n), corpus.hidden());
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (!member[row.ref]) continue;
    for (std::uint32_t k = 0; k < corpus.hidden(); ++k) d.X(i, k) = row.data[k];
    d.y.push_back(corpus.refs(field)[row.ref].label);
    d.ref.push_back(row.ref);
    ++i;
  }
  return d;
}

double evaluate(const ProbeModel& model, const DenseCorpus& corpus, FieldKind field,
                std::uint32_t layer, const std::vector<std::uint32_t>& refs, EvalUnit unit,
                std::size_t* n_units) {
  const Design d = gather(corpus, field, layer, refs);
  const Eigen::VectorXd s = model.score(d.X);
  if (unit == EvalUnit::Token) {
    *n_units = d.y.size();
    std::vector<double> scores(s.data(), s.data() + s.size());
    return auc(scores, d.y);
  }
  std::map<std::uint32_t, std::pair<double, std::size_t>> per_ref;
  for (std::size_t i = 0; i < d.ref.size(); ++i) {
    auto& acc = per_ref[d.ref[i]];
    acc.first += s[static_cast<Eigen::Index>(i)];
    ++acc.second;
  }
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& [r, acc] : per_ref) {
    scores.push_back(acc.first / static_cast<double>(acc.second));
    labels.push_back(corpus.refs(field)[r].label);
  }
  *n_units = scores.size();
  return auc(scores, labels);
}

ProbeModel fit_at(const DenseCorpus& corpus, FieldKind field, std::uint32_t layer,
                  const std::vector<std::uint32_t>& train_refs, const ProbeOptions& opts,
                  std::size_t* n_rows) {
  const Design d = gather(corpus, field, layer, train_refs);
  *n_rows = d.y.size();
  ProbeModel m = train_probe(d.X, d.y, opts);
  m.layer = static_cast<std::int32_t>(layer);
  m.field = field;
  return m;
}

}  // namespace

std::vector<LayerAuc> layer_sweep(const DenseCorpus& corpus, FieldKind field,
                                  const SplitPlan& split, const ProbeTaskOptions& opts) {
  if (!corpus.has_field(field))
    throw Error(Errc::MissingField, "store has no records for " + std::string(field_name(field)));
  const auto train_refs = partition_refs(corpus, field, split, true, opts.seed);
  const auto test_refs = partition_refs(corpus, field, split, false, opts.seed);
  std::vector<LayerAuc> out(corpus.n_layers());
  parallel_for(corpus.n_layers(), opts.jobs, [&](std::size_t l) {
    const auto layer = static_cast<std::uint32_t>(l);
    LayerAuc& r = out[l];
    r.layer = layer;
    const ProbeModel m = fit_at(corpus, field, layer, train_refs, opts.probe, &r.n_train);
    r.converged = m.converged;
    r.auc = evaluate(m, corpus, field, layer, test_refs, opts.eval_unit, &r.n_test);
  });
  return out;
}

AucMatrix cross_field_matrix(const DenseCorpus& corpus, const SplitPlan& split,
                             const ProbeTaskOptions& opts) {
  for (auto f : kAllFields)
    if (!corpus.has_field(f))
      throw Error(Errc::MissingField,
                  "cross-field matrix needs all five fields; missing " + std::string(field_name(f)));
  AucMatrix m;
  std::array<std::vector<std::uint32_t>, kFieldCount> train_refs, test_refs;
  for (auto f : kAllFields) {
    train_refs[field_index(f)] = partition_refs(corpus, f, split, true, opts.seed);
    test_refs[field_index(f)] = partition_refs(corpus, f, split, false, opts.seed);
  }
  for (auto src : kAllFields) {
    const auto sweep = layer_sweep(corpus, src, split, opts);
    const auto best = std::max_element(sweep.begin(), sweep.end(), [](const auto& a, const auto& b) {
      return a.auc < b.auc;
    });
    const std::uint32_t layer = best->layer;
    m.layer[field_index(src)] = layer;
    std::size_t n_rows = 0;
    const ProbeModel probe =
        fit_at(corpus, src, layer, train_refs[field_index(src)], opts.probe, &n_rows);
    for (auto dst : kAllFields) {
      std::size_t n_units = 0;
      m.auc[field_index(src)][field_index(dst)] =
          evaluate(probe, corpus, dst, layer, test_refs[field_index(dst)], opts.eval_unit, &n_units);
    }
  }
  return m;
}

json to_json(const SplitPlan& plan) {
  return json{{"train_topics", plan.train_topics},
              {"test_topics", plan.test_topics},
              {"fraction", plan.fraction},
              {"seed", plan.seed}};
}

json layer_auc_json(FieldKind field, const std::vector<LayerAuc>& sweep) {
  json layers = json::array();
  for (const auto& r : sweep)
    layers.push_back({{"layer", r.layer},
                      {"auc", r.auc},
                      {"n_train", r.n_train},
                      {"n_test", r.n_test},
                      {"converged", r.converged}});
  return json{{"field", field_name(field)}, {"layers", layers}};
}

json to_json(const AucMatrix& m) {
  json fields = json::array();
  json matrix = json::array();
  json layers = json::object();
  for (auto f : kAllFields) {
    fields.push_back(field_name(f));
    layers[std::string(field_name(f))] = m.layer[field_index(f)];
    json row = json::array();
    for (auto g : kAllFields) row.push_back(m.auc[field_index(f)][field_index(g)]);
    matrix.push_back(row);
  }
  return json{{"fields", fields}, {"auc", matrix}, {"source_layer", layers}};
}

std::string layer_auc_csv(FieldKind field, const std::vector<LayerAuc>& sweep, bool header) {
  std::ostringstream out;
  out.precision(10);
  if (header) out << "field,layer,auc,n_train,n_test\n";
  for (const auto& r : sweep)
    out << field_name(field) << ',' << r.layer << ',' << r.auc << ',' << r.n_train << ','
        << r.n_test << '\n';
  return out.str();
}

std::string crossfield_csv(const AucMatrix& m) {
  std::ostringstream out;
  out.precision(10);
  out << "train_field,eval_field,auc\n";
  for (auto f : kAllFields)
    for (auto g : kAllFields)
      out << field_name(f) << ',' << field_name(g) << ',' << m.auc[field_index(f)][field_index(g)]
          << '\n';
  return out.str();
}

}  // namespace fieldtrace
