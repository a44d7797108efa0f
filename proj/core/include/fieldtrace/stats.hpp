#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fieldtrace {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::string method_note;
};

/// (layer, value) pairs, e.g. probe AUC per layer.
using Series = std::vector<std::pair<double, double>>;

/// H with tie correction; p from chi-square with k-1 df.
/// Throws DegenerateGroups for fewer than 2 groups or an empty group.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Rank correlation (average ranks); p from the t approximation with n-2 df.
/// Throws InvalidArgument (length mismatch or n < 3) and ConstantInput.
TestResult spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided comparison of two correlations via Fisher's z.
/// Throws DegenerateRho (|rho| >= 1) and InvalidArgument (n < 4).
TestResult fisher_z_compare(double rho1, std::size_t n1, double rho2, std::size_t n2);

/// Statistic: population variance of the per-series Spearman rho. Null:
/// pooled points reassigned to series at random, keeping series sizes.
/// p = (1 + #{null >= observed}) / (n_perm + 1).
TestResult trend_variance_permutation(const std::vector<Series>& series, int n_perm,
                                      std::uint64_t seed);

enum class PeakResampling {
  NoiseOnly,  // every layer kept, N(0, sigma^2) added per resample
  Points,     // layers drawn with replacement, then noise added
};

struct PeakCi {
  int observed_peak_layer = 0;
  int median_peak = 0;
  int ci_low = 0;
  int ci_high = 0;
  int resamples = 0;
  double tie_noise_sigma = 0.001;
  std::map<int, int> peak_counts;  // layer -> resamples peaking there
};

/// 95% percentile interval of the argmax layer. Throws InvalidArgument for
/// fewer than 2 layers.
PeakCi bootstrap_peak_ci(const Series& series, int resamples, double sigma, std::uint64_t seed,
                         PeakResampling mode = PeakResampling::NoiseOnly);

enum class Direction { Less, Greater };
Direction parse_direction(const std::string& s);

/// One-sided signed-rank test on paired differences. Differences with
/// |d| <= tie_tolerance are dropped (zeros always). Exact p by enumerating
/// all 2^n sign patterns for n <= 12, normal approximation above.
/// Throws AllZero when nothing is left.
TestResult wilcoxon_one_sided(const std::vector<double>& deltas, Direction direction,
                              double tie_tolerance = 0.0);

/// Exact one-sided p for the signed-rank sum by 2^n enumeration over the
/// given (possibly tied) ranks.
double signed_rank_exact_p(const std::vector<double>& ranks, double w_plus, Direction direction);

nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const PeakCi& ci);

}  // namespace fieldtrace
