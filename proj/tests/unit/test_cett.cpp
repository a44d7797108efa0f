#include <gtest/gtest.h>

#include <random>

#include "fieldtrace/cett.hpp"
#include "fieldtrace/error.hpp"

using namespace fieldtrace;

TEST(Cett, HandValues) {
  EXPECT_DOUBLE_EQ(cett(0.0, 3.0, 6.0).value(), 0.0);
  EXPECT_DOUBLE_EQ(cett(2.0, 3.0, 6.0).value(), 1.0);
  EXPECT_DOUBLE_EQ(cett(-1.0, 1.0, 2.0).value(), 0.5);
}

TEST(Cett, DegenerateOutputIsSkipped) {
  EXPECT_FALSE(cett(1.0, 1.0, 0.0).has_value());
  EXPECT_FALSE(cett(1.0, 1.0, 1e-13).has_value());
  EXPECT_TRUE(cett(1.0, 1.0, 1e-13, 1e-14).has_value());
}

TEST(Cett, SignInvariantAndHomogeneous) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng), c = u(rng), y = u(rng), k = u(rng);
    EXPECT_DOUBLE_EQ(cett(a, c, y).value(), cett(-a, c, y).value());
    EXPECT_NEAR(cett(a, k * c, y).value(), k * cett(a, c, y).value(), 1e-12);
  }
}

TEST(CettTokenVector, FlattensAndCountsDegenerateLayers) {
  const std::vector<float> a0 = {1, 0, -2}, a1 = {3, 3, 3};
  const std::vector<float> n0 = {1, 1, 1}, n1 = {2, 2, 2};
  std::vector<LayerCettInputs> layers = {{a0, n0, 2.0}, {a1, n1, 0.0}};
  CettCounters counters;
  const auto v = cett_token_vector(layers, 3, 0.0, kDefaultCettEpsilon, &counters);
  EXPECT_EQ(v.index, (std::vector<std::uint32_t>{0, 2}));
  EXPECT_FLOAT_EQ(v.value[0], 0.5f);
  EXPECT_FLOAT_EQ(v.value[1], 1.0f);
  EXPECT_EQ(counters.degenerate_layers, 1u);

  layers[1].ffn_out_norm = 6.0;
  const auto w = cett_token_vector(layers, 3, 0.75);
  EXPECT_EQ(w.index, (std::vector<std::uint32_t>{2, 3, 4, 5}));
}

TEST(PoolFieldCett, Examples) {
  SparseVector one{{4, 9}, {1.5f, 2.0f}};
  EXPECT_EQ(pool_field_cett(std::vector<SparseVector>{one}), one);

  SparseVector i{{3}, {2.0f}}, j{{7}, {4.0f}};
  const auto pooled = pool_field_cett(std::vector<SparseVector>{i, j});
  EXPECT_EQ(pooled.index, (std::vector<std::uint32_t>{3, 7}));
  EXPECT_FLOAT_EQ(pooled.value[0], 1.0f);
  EXPECT_FLOAT_EQ(pooled.value[1], 2.0f);

  const auto same = pool_field_cett(std::vector<SparseVector>{one, one, one, one});
  EXPECT_EQ(same.index, one.index);
  EXPECT_FLOAT_EQ(same.value[0], 1.5f);
  EXPECT_FLOAT_EQ(same.value[1], 2.0f);
}

TEST(PoolFieldCett, MatchesDenseMean) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> coin(0, 2);
  std::uniform_real_distribution<float> val(0.1f, 2.0f);
  for (int iter = 0; iter < 50; ++iter) {
    const int dim = 40, k = 1 + iter % 6;
    std::vector<SparseVector> toks(k);
    std::vector<double> dense(dim, 0.0);
    for (auto& t : toks)
      for (int d = 0; d < dim; ++d)
        if (coin(rng) == 0) {
          float v = val(rng);
          t.index.push_back(d);
          t.value.push_back(v);
          dense[d] += v / k;
        }
    const auto p = pool_field_cett(toks);
    std::vector<double> got(dim, 0.0);
    for (std::size_t n = 0; n < p.nnz(); ++n) got[p.index[n]] = p.value[n];
    for (int d = 0; d < dim; ++d) EXPECT_NEAR(got[d], dense[d], 1e-6);
  }
}

TEST(PoolFieldCett, EmptySpan) {
  try {
    pool_field_cett(std::vector<SparseVector>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptySpan);
  }
}
