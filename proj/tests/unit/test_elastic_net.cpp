#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fieldtrace/elastic_net.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/synth.hpp"

using namespace fieldtrace;

namespace {

SparseDataset dense_toy(std::size_t n_per_class, std::vector<double> mu, std::vector<double> sd,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  SparseDataset d;
  d.dim = static_cast<std::uint32_t>(mu.size());
  d.n_layers = 1;
  d.dim_per_layer = d.dim;
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const std::uint8_t label = i % 2;
    SparseVector v;
    for (std::uint32_t k = 0; k < d.dim; ++k) {
      v.index.push_back(k);
      v.value.push_back(static_cast<float>((label ? mu[k] : 0.0) + sd[k] * g(rng)));
    }
    d.x.push_back(std::move(v));
    d.y.push_back(label);
    d.topic.push_back(static_cast<std::int32_t>(i % 10));
    d.ref_id.push_back("r" + std::to_string(i));
  }
  return d;
}

SparseSynthConfig small_cfg() {
  SparseSynthConfig c;
  c.n_layers = 4;
  c.dim_per_layer = 250;
  c.records_per_class = 200;
  c.background_nnz = 40;
  c.fields = {FieldKind::Title};
  return c;
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_DOUBLE_EQ(soft_threshold(0.5, 0.6), 0.0);
  EXPECT_NEAR(soft_threshold(-1.0, 0.3), -0.7, 1e-15);
  EXPECT_DOUBLE_EQ(soft_threshold(1.25, 0.0), 1.25);
  EXPECT_DOUBLE_EQ(soft_threshold(-3.0, 0.0), -3.0);
}

TEST(SoftThreshold, OddAndNonExpansive) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5), ut(0, 3);
  for (int i = 0; i < 10000; ++i) {
    double w = u(rng), v = u(rng), t = ut(rng);
    EXPECT_DOUBLE_EQ(soft_threshold(-w, t), -soft_threshold(w, t));
    EXPECT_LE(std::abs(soft_threshold(w, t) - soft_threshold(v, t)), std::abs(w - v) + 1e-15);
    EXPECT_LE(std::abs(soft_threshold(w, t)), std::abs(w));
  }
}

TEST(ElasticNet, LargeAlphaZeroesEverything) {
  auto cfg = small_cfg();
  cfg.effect = 0.0;
  const auto s = synth_sparse(cfg, 2);
  const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
  ElasticNetConfig en;
  en.alpha = 10.0;
  EXPECT_EQ(fit_elastic_net(data, en).nnz(), 0u);
}

TEST(ElasticNet, NoPenaltyRecoversBayesDirection) {
  const std::vector<double> mu = {1.0, 0.5}, sd = {1.0, 0.5};
  const auto data = dense_toy(2000, mu, sd, 3);
  ElasticNetConfig en;
  en.alpha = 0.0;
  en.epochs = 100;
  const auto m = fit_elastic_net(data, en);
  ASSERT_EQ(m.nnz(), 2u);
  const double b0 = mu[0] / (sd[0] * sd[0]), b1 = mu[1] / (sd[1] * sd[1]);
  const double cos = (m.weight[0] * b0 + m.weight[1] * b1) /
                     (std::hypot(m.weight[0], m.weight[1]) * std::hypot(b0, b1));
  EXPECT_GE(cos, 0.95);
}

TEST(ElasticNet, SmoothGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int iter = 0; iter < 10; ++iter) {
    auto data = dense_toy(6, {0.5, -0.2, 1.0, 0.0}, {1, 1, 1, 1}, 10 + iter);
    std::vector<double> w(data.dim);
    for (auto& v : w) v = g(rng);
    double b = g(rng);
    const double alpha = 0.3, r = 0.6;
    std::vector<double> gw;
    double gb = 0;
    elastic_net_smooth_gradient(data, w, b, alpha, r, gw, gb);
    ASSERT_EQ(gw.size(), data.dim);
    auto smooth = [&](const std::vector<double>& ww, double bb) {
      std::vector<double> tmp;
      double tb;
      return elastic_net_smooth_gradient(data, ww, bb, alpha, r, tmp, tb);
    };
    const double h = 1e-6;
    for (std::uint32_t k = 0; k < data.dim; ++k) {
      auto a = w, c = w;
      a[k] += h;
      c[k] -= h;
      const double fd = (smooth(a, b) - smooth(c, b)) / (2 * h);
      EXPECT_NEAR(gw[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
    const double fdb = (smooth(w, b + h) - smooth(w, b - h)) / (2 * h);
    EXPECT_NEAR(gb, fdb, 1e-5 * std::max(1.0, std::abs(fdb)));
    double l1 = 0;
    for (double v : w) l1 += std::abs(v);
    EXPECT_NEAR(elastic_net_objective(data, w, b, alpha, r), smooth(w, b) + alpha * r * l1, 1e-12);
  }
}

TEST(ElasticNet, EpochObjectiveNonIncreasing) {
  const auto s = synth_sparse(small_cfg(), 5);
  const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
  for (double lr : {0.05, 2.0}) {
    ElasticNetConfig en;
    en.alpha = 0.01;
    en.learning_rate = lr;
    en.epochs = 30;
    FitDiagnostics diag;
    fit_elastic_net(data, en, &diag);
    ASSERT_FALSE(diag.epoch_objective.empty());
    for (std::size_t e = 1; e < diag.epoch_objective.size(); ++e)
      EXPECT_LE(diag.epoch_objective[e], diag.epoch_objective[e - 1] + 1e-12) << "lr " << lr << " epoch " << e;
  }
}

TEST(ElasticNet, PureLassoProxNeverGrowsL1) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    double before = 0, after = 0;
    for (int k = 0; k < 50; ++k) {
      double w = g(rng);
      before += std::abs(w);
      after += std::abs(soft_threshold(w, 0.05 * 0.1 * 1.0));
    }
    EXPECT_LE(after, before);
  }
  const auto s = synth_sparse(small_cfg(), 6);
  const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
  ElasticNetConfig en;
  en.alpha = 0.05;
  en.l1_ratio = 1.0;
  const auto m = fit_elastic_net(data, en);
  EXPECT_GT(m.nnz(), 0u);
  EXPECT_LT(m.nnz(), 100u);
}

TEST(ElasticNet, PlantedRecoveryAtModerateAlpha) {
  double recovered = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = synth_sparse(small_cfg(), 100 + seed);
    const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
    ElasticNetConfig en;
    en.alpha = 0.05;
    en.seed = seed;
    const auto m = fit_elastic_net(data, en);
    const auto& planted = s.truth.planted[field_index(FieldKind::Title)];
    for (auto idx : planted)
      recovered += std::binary_search(m.index.begin(), m.index.end(), idx);
  }
  EXPECT_GE(recovered / 5.0, 16.0);
}

TEST(ElasticNet, DeterministicUnderSeed) {
  const auto s = synth_sparse(small_cfg(), 7);
  const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
  ElasticNetConfig en;
  en.alpha = 0.02;
  en.seed = 9;
  const auto a = fit_elastic_net(data, en), b = fit_elastic_net(data, en);
  EXPECT_EQ(a.index, b.index);
  EXPECT_EQ(a.weight, b.weight);
}

TEST(ElasticNet, Errors) {
  auto data = dense_toy(5, {1}, {1}, 1);
  for (auto& y : data.y) y = 1;
  EXPECT_THROW(fit_elastic_net(data, {}), Error);
  auto ok = dense_toy(5, {1}, {1}, 1);
  ElasticNetConfig bad;
  bad.l1_ratio = 0.0;
  EXPECT_THROW(fit_elastic_net(ok, bad), Error);
  bad = {};
  bad.learning_rate = -1;
  EXPECT_THROW(fit_elastic_net(ok, bad), Error);
  ok.x[0].value[0] = INFINITY;
  try {
    fit_elastic_net(ok, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::Divergence || e.code() == Errc::NonFinite);
  }
}

TEST(SparseDataset, FromStore) {
  const auto s = synth_sparse(small_cfg(), 8);
  const auto data = sparse_dataset(s.header, s.records, FieldKind::Title);
  EXPECT_EQ(data.size(), 400u);
  EXPECT_EQ(data.dim, 1000u);
  EXPECT_THROW(sparse_dataset(s.header, s.records, FieldKind::Doi), Error);
  const auto sub = data.subset({0, 5, 9});
  EXPECT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.ref_id[1], data.ref_id[5]);
}
