#include "fieldtrace/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"

namespace fieldtrace {

bool SplitPlan::is_train(std::int32_t topic) const {
  return std::binary_search(train_topics.begin(), train_topics.end(), topic);
}
bool SplitPlan::is_test(std::int32_t topic) const {
  return std::binary_search(test_topics.begin(), test_topics.end(), topic);
}

SplitPlan make_split(std::vector<std::int32_t> topics, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(Errc::InvalidArgument, "split fraction must be in (0, 1)");
  std::sort(topics.begin(), topics.end());
  topics.erase(std::unique(topics.begin(), topics.end()), topics.end());
  if (topics.size() < 2) throw Error(Errc::TooFewTopics, "need at least 2 distinct topics");

  std::mt19937_64 rng(derive_seed(seed, 0x5b117));
  std::shuffle(topics.begin(), topics.end(), rng);
  const auto n = static_cast<std::ptrdiff_t>(topics.size());
  auto n_train = static_cast<std::ptrdiff_t>(std::llround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::ptrdiff_t>(n_train, 1, n - 1);

  SplitPlan plan;
  plan.fraction = fraction;
  plan.seed = seed;
  plan.train_topics.assign(topics.begin(), topics.begin() + n_train);
  plan.test_topics.assign(topics.begin() + n_train, topics.end());
  std::sort(plan.train_topics.begin(), plan.train_topics.end());
  std::sort(plan.test_topics.begin(), plan.test_topics.end());
  return plan;
}

std::vector<std::size_t> balance_classes(const std::vector<std::uint8_t>& labels,
                                         std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw Error(Errc::SingleClass, "balancing needs both classes");
  auto& major = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  std::mt19937_64 rng(derive_seed(seed, 0xba1a));
  std::shuffle(major.begin(), major.end(), rng);
  major.resize(keep);
  std::vector<std::size_t> out;
  out.reserve(2 * keep);
  out.insert(out.end(), pos.begin(), pos.end());
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fieldtrace
