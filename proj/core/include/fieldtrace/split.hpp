#pragma once

#include <cstdint>
#include <vector>

namespace fieldtrace {

/// Topic-level train/test partition. Every topic lands on exactly one side.
struct SplitPlan {
  std::vector<std::int32_t> train_topics;  // sorted
  std::vector<std::int32_t> test_topics;   // sorted
  double fraction = 0.8;
  std::uint64_t seed = 0;

  bool is_train(std::int32_t topic) const;
  bool is_test(std::int32_t topic) const;
};

/// Deduplicates and sorts the topics, shuffles them under `seed` and puts
/// round(fraction * n) of them in train, clamped so both sides are non-empty.
/// Throws TooFewTopics (< 2 distinct topics) and InvalidArgument.
SplitPlan make_split(std::vector<std::int32_t> topics, double fraction, std::uint64_t seed);

/// Indices to keep so both classes have the minority count; the majority
/// class is downsampled uniformly without replacement. Returned sorted.
/// Throws SingleClass.
std::vector<std::size_t> balance_classes(const std::vector<std::uint8_t>& labels,
                                         std::uint64_t seed);

}  // namespace fieldtrace
