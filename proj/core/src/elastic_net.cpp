#include "fieldtrace/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"

namespace fieldtrace {

SparseDataset SparseDataset::subset(const std::vector<std::size_t>& rows) const {
  SparseDataset out;
  out.dim = dim;
  out.n_layers = n_layers;
  out.dim_per_layer = dim_per_layer;
  for (auto r : rows) {
    out.x.push_back(x.at(r));
    out.y.push_back(y[r]);
    out.topic.push_back(topic[r]);
    out.ref_id.push_back(ref_id[r]);
  }
  return out;
}

SparseDataset sparse_dataset(const StoreHeader& header, const std::vector<FeatureRecord>& records,
                             FieldKind field) {
  if (header.kind != StoreKind::SparseCett)
    throw Error(Errc::InvalidArgument, "neuron selection needs a SparseCett store");
  SparseDataset d;
  d.dim = static_cast<std::uint32_t>(header.total_dim());
  d.n_layers = header.n_layers;
  d.dim_per_layer = header.dim_per_layer;
  for (const auto& rec : records) {
    if (rec.field != field) continue;
    d.x.push_back(rec.sparse);
    d.y.push_back(rec.label);
    d.topic.push_back(rec.topic_id);
    d.ref_id.push_back(rec.ref_id);
  }
  if (d.y.empty())
    throw Error(Errc::MissingField, "store has no records for " + std::string(field_name(field)));
  return d;
}

double soft_threshold(double w, double t) {
  if (w > t) return w - t;
  if (w < -t) return w + t;
  return 0.0;
}

double SparseLinearModel::score(const SparseVector& x) const {
  double z = bias;
  std::size_t a = 0, b = 0;
  while (a < index.size() && b < x.index.size()) {
    if (index[a] < x.index[b]) {
      ++a;
    } else if (index[a] > x.index[b]) {
      ++b;
    } else {
      z += weight[a] * x.value[b];
      ++a;
      ++b;
    }
  }
  return z;
}

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double margin(const SparseVector& x, const std::vector<double>& w, double b) {
  double z = b;
  for (std::size_t k = 0; k < x.index.size(); ++k) z += w[x.index[k]] * x.value[k];
  return z;
}

double mean_bce(const SparseDataset& data, const std::vector<double>& w, double b) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = margin(data.x[i], w, b);
    loss += softplus(data.y[i] ? -z : z);
  }
  return loss / static_cast<double>(data.size());
}

void check_config(const SparseDataset& data, const ElasticNetConfig& cfg) {
  if (!(cfg.alpha >= 0.0) || !(cfg.l1_ratio > 0.0 && cfg.l1_ratio <= 1.0) ||
      !(cfg.learning_rate > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1)
    throw Error(Errc::InvalidArgument, "elastic net: invalid configuration");
  std::size_t n_pos = 0;
  for (auto v : data.y) n_pos += (v != 0);
  if (n_pos == 0 || n_pos == data.size())
    throw Error(Errc::SingleClass, "elastic net needs both classes");
  for (const auto& x : data.x)
    for (std::size_t k = 0; k < x.index.size(); ++k)
      if (x.index[k] >= data.dim) throw Error(Errc::InvalidArgument, "feature index out of range");
}

}  // namespace

double elastic_net_objective(const SparseDataset& data, const std::vector<double>& w, double b,
                             double alpha, double l1_ratio) {
  double l1 = 0.0, l2 = 0.0;
  for (double v : w) {
    l1 += std::abs(v);
    l2 += v * v;
  }
  return mean_bce(data, w, b) + alpha * l1_ratio * l1 + 0.5 * alpha * (1.0 - l1_ratio) * l2;
}

double elastic_net_smooth_gradient(const SparseDataset& data, const std::vector<double>& w,
                                   double b, double alpha, double l1_ratio,
                                   std::vector<double>& grad_w, double& grad_b) {
  const double inv_n = 1.0 / static_cast<double>(data.size());
  const double l2_coef = alpha * (1.0 - l1_ratio);
  grad_w.assign(data.dim, 0.0);
  grad_b = 0.0;
  double loss = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = margin(data.x[i], w, b);
    loss += softplus(data.y[i] ? -z : z);
    const double r = (sigmoid(z) - (data.y[i] ? 1.0 : 0.0)) * inv_n;
    grad_b += r;
    for (std::size_t k = 0; k < data.x[i].index.size(); ++k)
      grad_w[data.x[i].index[k]] += r * data.x[i].value[k];
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    grad_w[j] += l2_coef * w[j];
    l2 += w[j] * w[j];
  }
  return loss * inv_n + 0.5 * l2_coef * l2;
}

SparseLinearModel fit_elastic_net(const SparseDataset& data, const ElasticNetConfig& cfg,
                                  FitDiagnostics* diagnostics) {
  check_config(data, cfg);
  const std::size_t n = data.size();
  const double l2_coef = cfg.alpha * (1.0 - cfg.l1_ratio);
  const double l1_coef = cfg.alpha * cfg.l1_ratio;

  std::vector<double> w(data.dim, 0.0), grad(data.dim, 0.0);
  std::vector<std::uint32_t> stamp(data.dim, 0);
  std::vector<std::uint32_t> active, update;
  double b = 0.0;
  std::uint32_t step_id = 0;

  std::vector<double> saved_w;
  std::vector<std::uint32_t> saved_active;
  double saved_b = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(cfg.seed, 0xe1a5));
  double eta = cfg.learning_rate;
  double prev = elastic_net_objective(data, w, b, cfg.alpha, cfg.l1_ratio);
  FitDiagnostics diag;

  for (int epoch = 0; epoch < cfg.epochs;) {
    saved_b = b;
    saved_active = active;
    saved_w.resize(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) saved_w[k] = w[active[k]];
    const auto rng_state = rng;

    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_m = 1.0 / static_cast<double>(end - start);
      ++step_id;
      update.clear();
      for (auto j : active) {
        stamp[j] = step_id;
        update.push_back(j);
      }
      double grad_b = 0.0;
      for (std::size_t p = start; p < end; ++p) {
        const auto i = order[p];
        const auto& x = data.x[i];
        const double r = (sigmoid(margin(x, w, b)) - (data.y[i] ? 1.0 : 0.0)) * inv_m;
        grad_b += r;
        for (std::size_t k = 0; k < x.index.size(); ++k) {
          const auto j = x.index[k];
          if (stamp[j] != step_id) {
            stamp[j] = step_id;
            update.push_back(j);
          }
          grad[j] += r * x.value[k];
        }
      }
      active.clear();
      for (auto j : update) {
        const double v = soft_threshold(w[j] - eta * (grad[j] + l2_coef * w[j]), eta * l1_coef);
        w[j] = v;
        grad[j] = 0.0;
        if (v != 0.0) active.push_back(j);
      }
      b -= eta * grad_b;
    }

    const double obj = elastic_net_objective(data, w, b, cfg.alpha, cfg.l1_ratio);
    if (!std::isfinite(obj)) {
      std::ostringstream msg;
      msg << "objective became non-finite at epoch " << epoch << " with learning rate " << eta
          << "; retry with a smaller learning rate (e.g. " << eta / 2 << ")";
      throw Error(Errc::Divergence, msg.str());
    }
    if (cfg.auto_halving && obj > prev + 1e-12 * std::max(1.0, std::abs(prev))) {
      for (auto j : active) w[j] = 0.0;
      for (std::size_t k = 0; k < saved_active.size(); ++k) w[saved_active[k]] = saved_w[k];
      active = saved_active;
      b = saved_b;
      if (diag.halvings >= cfg.max_halvings) {
        // Minibatch noise dominates at this rate; keep the last accepted epoch.
        diag.stalled = true;
        break;
      }
      rng = rng_state;
      eta *= 0.5;
      ++diag.halvings;
      continue;
    }
    prev = obj;
    diag.epoch_objective.push_back(obj);
    ++epoch;
  }

  SparseLinearModel model;
  model.bias = b;
  std::sort(active.begin(), active.end());
  for (auto j : active) {
    model.index.push_back(j);
    model.weight.push_back(w[j]);
  }
  diag.final_learning_rate = eta;
  if (diagnostics) *diagnostics = std::move(diag);
  return model;
}

}  // namespace fieldtrace
