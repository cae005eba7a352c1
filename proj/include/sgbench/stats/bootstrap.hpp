#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace sgbench::stats {

inline constexpr std::size_t kDefaultResamples = 2000;

struct BootstrapResult {
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
};

/// Linearly interpolated quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Resampled index sets: n_resamples draws of n indices with replacement.
/// Deterministic in (n, n_resamples, seed).
class Resampler {
public:
  Resampler(std::size_t n, std::uint64_t seed);
  const std::vector<std::size_t>& next();

private:
  std::vector<std::size_t> indices_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::size_t> pick_;
};

/// Percentile CI of the resampled mean.
BootstrapResult bootstrap_mean_ci(std::span<const double> samples,
                                  std::size_t n_resamples = kDefaultResamples, double level = 0.95,
                                  std::uint64_t seed = 0);

/// Percentile CI of mean(a_i - b_i), resampling paired indices.
BootstrapResult paired_bootstrap_diff(std::span<const double> a, std::span<const double> b,
                                      std::size_t n_resamples = kDefaultResamples,
                                      std::uint64_t seed = 0, double level = 0.95);

}  // namespace sgbench::stats
