#pragma once

// Slow reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fieldtrace/stats.hpp"

namespace fieldtrace::testing {

// Average ranks by counting, O(n^2).
inline std::vector<double> naive_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

inline double naive_kruskal_h(const std::vector<std::vector<double>>& groups) {
  std::vector<double> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  const auto r = naive_ranks(all);
  const double n = static_cast<double>(all.size());
  double h = 0;
  std::size_t at = 0;
  for (const auto& g : groups) {
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) s += r[at++];
    h += s * s / static_cast<double>(g.size());
  }
  h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1);
  double ties = 0;
  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  return h / (1 - ties / (n * n * n - n));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// One-sided signed-rank p over all 2^n sign flips; zeros dropped.
inline double brute_wilcoxon(std::vector<double> d, Direction dir) {
  d.erase(std::remove(d.begin(), d.end(), 0.0), d.end());
  std::vector<double> mags;
  for (double v : d) mags.push_back(std::abs(v));
  const auto ranks = naive_ranks(mags);
  double w = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0) w += ranks[i];
  const std::size_t n = d.size();
  double count = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += ranks[i];
    count += dir == Direction::Less ? (s <= w + 1e-9) : (s >= w - 1e-9);
  }
  return count / static_cast<double>(1ull << n);
}

inline double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        den += 1;
      }
  return num / den;
}

}  // namespace fieldtrace::testing
