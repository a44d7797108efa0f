#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fieldtrace {

/// Rank-statistic ROC AUC; tied scores count one half. Label 1 is positive.
/// Throws Error(SingleClass) unless both classes are present, and
/// Error(NonFinite) on NaN scores.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average 1-based ranks (ties share the mean rank).
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace fieldtrace
