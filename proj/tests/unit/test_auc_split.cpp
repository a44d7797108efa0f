#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fieldtrace/auc.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/split.hpp"
#include "oracles.hpp"

using namespace fieldtrace;

using fieldtrace::testing::pairwise_auc;

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<std::uint8_t>{1, 0, 1, 0}), 0.5);
  const std::vector<double> s = {0.8, 0.4, 0.4, 0.7, 0.1, 0.55};
  const std::vector<std::uint8_t> y = {1, 1, 0, 0, 0, 1};
  // positives 0.8, 0.4, 0.55 vs negatives 0.4, 0.7, 0.1: 3 + 1.5 + 2 = 6.5 of 9
  EXPECT_NEAR(auc(s, y), 6.5 / 9.0, 1e-15);
  EXPECT_NEAR(auc(s, y), pairwise_auc(s, y), 1e-15);
}

TEST(Auc, Errors) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  EXPECT_EQ(code([] { auc(std::vector<double>{1, 2}, std::vector<std::uint8_t>{1, 1}); }), Errc::SingleClass);
  EXPECT_EQ(code([] { auc(std::vector<double>{1, NAN}, std::vector<std::uint8_t>{1, 0}); }), Errc::NonFinite);
}

TEST(Auc, RandomMatchesPairwiseAndProperties) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> bucket(0, 6);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 4 + iter % 40;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = bucket(rng) * 0.25;
      y[i] = static_cast<std::uint8_t>(i % 2);
    }
    std::shuffle(y.begin(), y.end(), rng);
    const double a = auc(s, y);
    EXPECT_NEAR(a, pairwise_auc(s, y), 1e-12);
    std::vector<double> t(n);
    std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(3 * v) - 7; });
    EXPECT_NEAR(auc(t, y), a, 1e-12);
    std::vector<std::uint8_t> flipped(n);
    std::transform(y.begin(), y.end(), flipped.begin(), [](std::uint8_t v) { return std::uint8_t(1 - v); });
    EXPECT_NEAR(auc(s, flipped), 1.0 - a, 1e-12);
  }
}

TEST(AverageRanks, TiesShareMean) {
  const auto r = average_ranks(std::vector<double>{10, 20, 10, 30});
  EXPECT_EQ(r, (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(MakeSplit, FiftyTopics) {
  std::vector<std::int32_t> topics(50);
  std::iota(topics.begin(), topics.end(), 0);
  const auto p = make_split(topics, 0.8, 11);
  EXPECT_EQ(p.train_topics.size(), 40u);
  EXPECT_EQ(p.test_topics.size(), 10u);
  const auto q = make_split(topics, 0.8, 11);
  EXPECT_EQ(p.train_topics, q.train_topics);
  EXPECT_TRUE(std::is_sorted(p.train_topics.begin(), p.train_topics.end()));
}

TEST(MakeSplit, PartitionPropertyOverSeeds) {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<std::int32_t> topics;
    const int n = 2 + static_cast<int>(seed % 30);
    for (int i = 0; i < n; ++i) topics.push_back(i * 3);
    topics.push_back(0);  // duplicate
    std::shuffle(topics.begin(), topics.end(), rng);
    const auto p = make_split(topics, 0.1 + 0.008 * seed, seed);
    std::set<std::int32_t> train(p.train_topics.begin(), p.train_topics.end());
    std::set<std::int32_t> test(p.test_topics.begin(), p.test_topics.end());
    EXPECT_FALSE(train.empty());
    EXPECT_FALSE(test.empty());
    for (auto t : train) EXPECT_FALSE(test.count(t));
    EXPECT_EQ(train.size() + test.size(), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) EXPECT_TRUE(p.is_train(i * 3) != p.is_test(i * 3));
  }
}

TEST(MakeSplit, Errors) {
  EXPECT_THROW(make_split({1, 1, 1}, 0.5, 0), Error);
  EXPECT_THROW(make_split({1, 2, 3}, 1.0, 0), Error);
  EXPECT_THROW(make_split({1, 2, 3}, 0.0, 0), Error);
}

TEST(BalanceClasses, Downsamples) {
  std::vector<std::uint8_t> y(40, 1);
  for (int i = 0; i < 10; ++i) y[i * 4] = 0;
  const auto keep = balance_classes(y, 5);
  int pos = 0, neg = 0;
  for (auto i : keep) (y[i] ? pos : neg)++;
  EXPECT_EQ(pos, 10);
  EXPECT_EQ(neg, 10);
  EXPECT_TRUE(std::is_sorted(keep.begin(), keep.end()));
  EXPECT_EQ(keep, balance_classes(y, 5));
  EXPECT_NE(keep, balance_classes(y, 6));

  std::vector<std::uint8_t> balanced = {0, 1, 1, 0};
  EXPECT_EQ(balance_classes(balanced, 1), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_THROW(balance_classes({1, 1}, 0), Error);
}
