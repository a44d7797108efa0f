#include "fieldtrace/auc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fieldtrace/error.hpp"

namespace fieldtrace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw Error(Errc::InvalidArgument, "auc: scores and labels differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw Error(Errc::NonFinite, "auc: NaN score");
  double n_pos = 0;
  for (auto l : labels) n_pos += (l != 0);
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::SingleClass, "auc needs both classes");
  const auto ranks = average_ranks(scores);
  double rank_sum = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (labels[i]) rank_sum += ranks[i];
  return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg);
}

}  // namespace fieldtrace
