#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fieldtrace/error.hpp"
#include "fieldtrace/featstore.hpp"
#include "fieldtrace/synth.hpp"
#include "test_support.hpp"

using namespace fieldtrace;

namespace {

SparseSynthConfig small_sparse() {
  SparseSynthConfig c;
  c.n_layers = 8;
  c.dim_per_layer = 250;
  c.planted_per_field = 20;
  c.records_per_class = 300;
  c.background_nnz = 40;
  return c;
}

// Mean value of the planted coordinates of `field`, per class.
std::array<double, 2> class_means(const SynthStore& s, FieldKind field) {
  const auto& planted = s.truth.planted[field_index(field)];
  std::array<double, 2> sum{0, 0};
  std::array<double, 2> cnt{0, 0};
  for (const auto& r : s.records) {
    if (r.field != field) continue;
    for (auto idx : planted) {
      auto it = std::lower_bound(r.sparse.index.begin(), r.sparse.index.end(), idx);
      double v = (it != r.sparse.index.end() && *it == idx) ? r.sparse.value[it - r.sparse.index.begin()] : 0.0;
      sum[r.label] += v;
      cnt[r.label] += 1;
    }
  }
  return {sum[0] / cnt[0], sum[1] / cnt[1]};
}

// E|X| for X ~ N(mu, sigma^2).
double folded_mean(double mu, double sigma) {
  return sigma * std::sqrt(2.0 / M_PI) * std::exp(-mu * mu / (2 * sigma * sigma)) +
         mu * std::erf(mu / (sigma * std::sqrt(2.0)));
}

}  // namespace

TEST(SynthSparse, SameSeedSameBytes) {
  fieldtrace::testing::TempDir dir("synth");
  const auto a = synth_sparse(small_sparse(), 42);
  const auto b = synth_sparse(small_sparse(), 42);
  write_store(dir / "a.cfs", a.header, a.records);
  write_store(dir / "b.cfs", b.header, b.records);
  EXPECT_EQ(fieldtrace::testing::read_file(dir / "a.cfs"), fieldtrace::testing::read_file(dir / "b.cfs"));
  const auto c = synth_sparse(small_sparse(), 43);
  EXPECT_NE(a.records, c.records);
}

TEST(SynthSparse, ShapeAndTruth) {
  const auto cfg = small_sparse();
  const auto s = synth_sparse(cfg, 1);
  EXPECT_EQ(s.records.size(), 2u * cfg.records_per_class * kFieldCount);
  EXPECT_EQ(s.header.record_count, s.records.size());
  std::set<std::uint32_t> all;
  for (auto f : kAllFields) {
    EXPECT_EQ(s.truth.planted[field_index(f)].size(), cfg.planted_per_field);
    all.insert(s.truth.planted[field_index(f)].begin(), s.truth.planted[field_index(f)].end());
  }
  EXPECT_EQ(all.size(), cfg.planted_per_field * kFieldCount);
  const auto parsed = truth_from_metadata(s.header.metadata);
  EXPECT_EQ(parsed.planted, s.truth.planted);
  std::array<int, 2> labels{0, 0};
  for (const auto& r : s.records) {
    validate_record(s.header, r);
    if (r.field == FieldKind::Title) ++labels[r.label];
  }
  EXPECT_EQ(labels[0], static_cast<int>(cfg.records_per_class));
  EXPECT_EQ(labels[1], static_cast<int>(cfg.records_per_class));
}

TEST(SynthSparse, PlantedMeanGapMatchesFoldedNormal) {
  const auto cfg = small_sparse();
  const auto s = synth_sparse(cfg, 7);
  const double n = static_cast<double>(cfg.records_per_class) * cfg.planted_per_field;
  for (auto f : kAllFields) {
    const auto m = class_means(s, f);
    EXPECT_NEAR(m[1], folded_mean(cfg.effect, cfg.noise), 3 * cfg.noise / std::sqrt(n));
    EXPECT_NEAR(m[0], folded_mean(0.0, cfg.noise), 3 * cfg.noise / std::sqrt(n));
    const double expected_gap = cfg.effect - cfg.noise * std::sqrt(2.0 / M_PI);
    EXPECT_NEAR(m[1] - m[0], expected_gap, 2 * 3 * cfg.noise / std::sqrt(n));
  }
}

TEST(SynthSparse, NullEffectIsIndistinguishable) {
  auto cfg = small_sparse();
  cfg.effect = 0.0;
  const auto s = synth_sparse(cfg, 3);
  const double n = static_cast<double>(cfg.records_per_class) * cfg.planted_per_field;
  const auto m = class_means(s, FieldKind::Year);
  EXPECT_NEAR(m[1] - m[0], 0.0, 2 * 3 * cfg.noise / std::sqrt(n));
  // background coordinates share the planted null distribution
  double bg = 0;
  std::size_t cnt = 0;
  const auto& planted = s.truth.planted[field_index(FieldKind::Year)];
  for (const auto& r : s.records) {
    if (r.field != FieldKind::Year) continue;
    for (std::size_t k = 0; k < r.sparse.nnz(); ++k)
      if (!std::binary_search(planted.begin(), planted.end(), r.sparse.index[k])) {
        bg += r.sparse.value[k];
        ++cnt;
      }
  }
  EXPECT_NEAR(bg / cnt, folded_mean(0.0, cfg.noise), 0.01);
}

TEST(SynthSparse, ContradictoryConfig) {
  auto cfg = small_sparse();
  cfg.planted_per_field = 500;
  try {
    synth_sparse(cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigContradiction);
  }
}

TEST(SynthDense, DirectionsAreOrthonormal) {
  DenseSynthConfig cfg;
  cfg.records_per_class = 50;
  const auto s = synth_dense(cfg, 5);
  for (auto a : kAllFields) {
    const auto& da = s.truth.directions[field_index(a)];
    ASSERT_EQ(da.size(), cfg.hidden);
    for (auto b : kAllFields) {
      const auto& db = s.truth.directions[field_index(b)];
      double dot = std::inner_product(da.begin(), da.end(), db.begin(), 0.0);
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-6);
    }
  }
  EXPECT_EQ(s.records.size(), 2u * cfg.records_per_class * kFieldCount * cfg.n_layers);
}

TEST(SynthDense, ShiftOnlyInSignalLayers) {
  DenseSynthConfig cfg;
  cfg.n_layers = 4;
  cfg.signal_layers = {2};
  cfg.records_per_class = 400;
  const auto s = synth_dense(cfg, 6);
  const auto& dir = s.truth.directions[field_index(FieldKind::Doi)];
  std::array<std::array<double, 2>, 4> proj{};
  for (const auto& r : s.records) {
    if (r.field != FieldKind::Doi) continue;
    proj[r.layer][r.label] += std::inner_product(dir.begin(), dir.end(), r.dense.begin(), 0.0) / cfg.records_per_class;
  }
  const double tol = 4.0 * std::sqrt(2.0 / cfg.records_per_class);
  for (int l = 0; l < 4; ++l)
    EXPECT_NEAR(proj[l][1] - proj[l][0], l == 2 ? cfg.effect : 0.0, tol) << "layer " << l;
  DenseSynthConfig bad = cfg;
  bad.signal_layers = {9};
  EXPECT_THROW(synth_dense(bad, 1), Error);
}
