#include "fieldtrace/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "fieldtrace/auc.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"

namespace fieldtrace {

using nlohmann::json;

namespace {

double tie_sum(std::vector<double> values) {  // sum over tie groups of t^3 - t
  std::sort(values.begin(), values.end());
  double s = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double t = static_cast<double>(j - i);
    s += t * t * t - t;
    i = j;
  }
  return s;
}

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal_distribution<>(), z); }

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

std::optional<double> try_spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double population_variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(Errc::DegenerateGroups, "Kruskal-Wallis needs >= 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(Errc::DegenerateGroups, "Kruskal-Wallis group is empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  for (double v : pooled)
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "Kruskal-Wallis input is not finite");
  const auto ranks = average_ranks(pooled);
  const double n = static_cast<double>(pooled.size());
  double h = 0.0;
  std::size_t at = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) r += ranks[at++];
    h += r * r / static_cast<double>(g.size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  const double correction = 1.0 - tie_sum(pooled) / (n * n * n - n);
  TestResult out;
  out.n = pooled.size();
  const double df = static_cast<double>(groups.size() - 1);
  if (correction <= 0.0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.method_note = "all values tied; H set to 0";
    return out;
  }
  out.statistic = std::max(0.0, h / correction);
  out.p_value = clamp01(
      boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), out.statistic)));
  std::ostringstream note;
  note << "tie-corrected H, chi-square approximation with " << df << " df";
  out.method_note = note.str();
  return out;
}

TestResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(Errc::InvalidArgument, "spearman: length mismatch");
  if (x.size() < 3) throw Error(Errc::InvalidArgument, "spearman needs at least 3 pairs");
  const auto rho = try_spearman_rho(x, y);
  if (!rho) throw Error(Errc::ConstantInput, "spearman: constant input");
  TestResult out;
  out.statistic = *rho;
  out.n = x.size();
  const double df = static_cast<double>(x.size()) - 2.0;
  if (std::abs(*rho) >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = *rho * std::sqrt(df / (1.0 - *rho * *rho));
    out.p_value = clamp01(2.0 * boost::math::cdf(boost::math::complement(
                                    boost::math::students_t_distribution<>(df), std::abs(t))));
  }
  out.method_note = "average ranks; two-sided t approximation";
  return out;
}

TestResult fisher_z_compare(double rho1, std::size_t n1, double rho2, std::size_t n2) {
  if (!(std::abs(rho1) < 1.0) || !(std::abs(rho2) < 1.0))
    throw Error(Errc::DegenerateRho, "Fisher z needs |rho| < 1");
  if (n1 < 4 || n2 < 4) throw Error(Errc::InvalidArgument, "Fisher z needs n >= 4");
  const double se = std::sqrt(1.0 / (static_cast<double>(n1) - 3.0) +
                              1.0 / (static_cast<double>(n2) - 3.0));
  TestResult out;
  out.statistic = (std::atanh(rho1) - std::atanh(rho2)) / se;
  out.p_value = clamp01(2.0 * normal_cdf(-std::abs(out.statistic)));
  out.n = n1 + n2;
  out.method_note = "two-sided normal p";
  return out;
}

TestResult trend_variance_permutation(const std::vector<Series>& series, int n_perm,
                                      std::uint64_t seed) {
  if (series.size() < 2) throw Error(Errc::InvalidArgument, "trend variance needs >= 2 series");
  if (n_perm < 1) throw Error(Errc::InvalidArgument, "n_perm must be >= 1");
  auto rho_of = [](const Series& s) {
    std::vector<double> x, y;
    for (const auto& [a, b] : s) {
      x.push_back(a);
      y.push_back(b);
    }
    if (s.size() < 3) throw Error(Errc::InvalidArgument, "each series needs >= 3 points");
    return try_spearman_rho(x, y).value_or(0.0);
  };
  std::vector<double> rhos;
  Series pooled;
  for (const auto& s : series) {
    rhos.push_back(rho_of(s));
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  const double observed = population_variance(rhos);

  std::mt19937_64 rng(derive_seed(seed, 0x7e4d));
  std::size_t at_least = 0;
  const double eps = 1e-12 * std::max(1.0, observed);
  for (int k = 0; k < n_perm; ++k) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    std::size_t at = 0;
    std::vector<double> null_rhos;
    for (const auto& s : series) {
      Series part(pooled.begin() + static_cast<std::ptrdiff_t>(at),
                  pooled.begin() + static_cast<std::ptrdiff_t>(at + s.size()));
      at += s.size();
      null_rhos.push_back(rho_of(part));
    }
    if (population_variance(null_rhos) >= observed - eps) ++at_least;
  }
  TestResult out;
  out.statistic = observed;
  out.p_value = (1.0 + static_cast<double>(at_least)) / (n_perm + 1.0);
  out.n = pooled.size();
  std::ostringstream note;
  note << "population variance of " << series.size() << " Spearman rho; " << n_perm
       << " label permutations, add-one smoothing";
  out.method_note = note.str();
  return out;
}

PeakCi bootstrap_peak_ci(const Series& series, int resamples, double sigma, std::uint64_t seed,
                         PeakResampling mode) {
  if (series.size() < 2) throw Error(Errc::InvalidArgument, "peak CI needs >= 2 layers");
  if (resamples < 1 || !(sigma >= 0.0))
    throw Error(Errc::InvalidArgument, "peak CI needs resamples >= 1 and sigma >= 0");
  auto argmax_layer = [&](const std::vector<std::size_t>& idx, const std::vector<double>& vals) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (vals[k] > vals[best]) best = k;
    return static_cast<int>(std::lround(series[idx[best]].first));
  };

  PeakCi ci;
  ci.resamples = resamples;
  ci.tie_noise_sigma = sigma;
  std::vector<std::size_t> all(series.size());
  std::iota(all.begin(), all.end(), 0);
  {
    std::vector<double> vals;
    for (const auto& p : series) vals.push_back(p.second);
    ci.observed_peak_layer = argmax_layer(all, vals);
  }

  std::mt19937_64 rng(derive_seed(seed, 0xb007));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, series.size() - 1);
  std::vector<int> peaks;
  peaks.reserve(static_cast<std::size_t>(resamples));
  std::vector<std::size_t> idx(series.size());
  std::vector<double> vals(series.size());
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t k = 0; k < series.size(); ++k) {
      idx[k] = mode == PeakResampling::Points ? pick(rng) : k;
      vals[k] = series[idx[k]].second + sigma * noise(rng);
    }
    const int peak = argmax_layer(idx, vals);
    peaks.push_back(peak);
    ++ci.peak_counts[peak];
  }
  std::sort(peaks.begin(), peaks.end());
  auto quantile = [&](double q) {
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(peaks.size()))) - 1;
    rank = std::clamp<std::ptrdiff_t>(rank, 0, static_cast<std::ptrdiff_t>(peaks.size()) - 1);
    return peaks[static_cast<std::size_t>(rank)];
  };
  ci.ci_low = quantile(0.025);
  ci.median_peak = quantile(0.5);
  ci.ci_high = quantile(0.975);
  return ci;
}

Direction parse_direction(const std::string& s) {
  if (s == "less") return Direction::Less;
  if (s == "greater") return Direction::Greater;
  throw Error(Errc::InvalidArgument, "direction must be less or greater, got " + s);
}

double signed_rank_exact_p(const std::vector<double>& ranks, double w_plus, Direction direction) {
  const std::size_t n = ranks.size();
  if (n > 25) throw Error(Errc::InvalidArgument, "exact enumeration limited to n <= 25");
  const double eps = 1e-9;
  std::uint64_t hits = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (mask >> k & 1U) w += ranks[k];
    if (direction == Direction::Less ? w <= w_plus + eps : w >= w_plus - eps) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

TestResult wilcoxon_one_sided(const std::vector<double>& deltas, Direction direction,
                              double tie_tolerance) {
  if (!(tie_tolerance >= 0.0)) throw Error(Errc::InvalidArgument, "tie tolerance must be >= 0");
  std::vector<double> kept;
  std::size_t dropped = 0;
  for (double d : deltas) {
    if (!std::isfinite(d)) throw Error(Errc::NonFinite, "wilcoxon: non-finite difference");
    if (d == 0.0 || std::abs(d) <= tie_tolerance) {
      ++dropped;
      continue;
    }
    kept.push_back(d);
  }
  if (kept.empty()) throw Error(Errc::AllZero, "wilcoxon: every difference is zero or tied");
  std::vector<double> mags;
  for (double d : kept) mags.push_back(std::abs(d));
  const auto ranks = average_ranks(mags);
  double w_plus = 0.0;
  for (std::size_t k = 0; k < kept.size(); ++k)
    if (kept[k] > 0) w_plus += ranks[k];

  TestResult out;
  out.statistic = w_plus;
  out.n = kept.size();
  std::ostringstream note;
  note << "W+ signed-rank, one-sided " << (direction == Direction::Less ? "less" : "greater")
       << "; " << dropped << " zero/tied difference(s) excluded";
  if (tie_tolerance > 0.0) note << " (tolerance " << tie_tolerance << ")";
  const std::size_t n = kept.size();
  if (n <= 12) {
    out.p_value = signed_rank_exact_p(ranks, w_plus, direction);
    note << "; exact enumeration";
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_sum(mags) / 48.0;
    const double z = (w_plus - mean) / std::sqrt(var);
    out.p_value = direction == Direction::Less ? normal_cdf(z) : normal_cdf(-z);
    note << "; normal approximation";
  }
  out.p_value = clamp01(out.p_value);
  out.method_note = note.str();
  return out;
}

json to_json(const TestResult& r) {
  return json{{"statistic", r.statistic},
              {"p_value", r.p_value},
              {"n", r.n},
              {"method_note", r.method_note}};
}

json to_json(const PeakCi& ci) {
  json counts = json::object();
  for (const auto& [layer, c] : ci.peak_counts) counts[std::to_string(layer)] = c;
  return json{{"observed_peak_layer", ci.observed_peak_layer},
              {"median_peak", ci.median_peak},
              {"ci_low", ci.ci_low},
              {"ci_high", ci.ci_high},
              {"resamples", ci.resamples},
              {"tie_noise_sigma", ci.tie_noise_sigma},
              {"peak_counts", counts}};
}

}  // namespace fieldtrace
