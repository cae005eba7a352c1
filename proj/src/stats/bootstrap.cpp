#include "sgbench/stats/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgbench/core/error.hpp"

namespace sgbench::stats {
namespace {

std::mt19937_64 make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x626f6f74u};
  return std::mt19937_64(seq);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

BootstrapResult mean_ci(std::span<const double> samples, std::size_t n_resamples, double level,
                        std::uint64_t seed) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "bootstrap: empty sample");
  require(n_resamples >= 1, ErrorKind::InvalidArgument, "bootstrap: need at least one resample");
  require(level > 0.0 && level < 1.0, ErrorKind::InvalidArgument, "bootstrap: level must be in (0, 1)");
  BootstrapResult r;
  r.point_estimate = mean_of(samples);
  r.n_resamples = n_resamples;
  r.seed = seed;
  const bool constant = std::all_of(samples.begin(), samples.end(),
                                    [&](double v) { return v == samples.front(); });
  if (constant) {
    r.point_estimate = r.ci_low = r.ci_high = samples.front();
    return r;
  }
  Resampler resampler(samples.size(), seed);
  std::vector<double> means(n_resamples);
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t i : resampler.next()) acc += samples[i];
    m = acc / static_cast<double>(samples.size());
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - level);
  r.ci_low = quantile_sorted(means, alpha);
  r.ci_high = quantile_sorted(means, 1.0 - alpha);
  return r;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorKind::InvalidArgument, "quantile: empty input");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Resampler::Resampler(std::size_t n, std::uint64_t seed)
    : indices_(n), rng_(make_rng(seed)), pick_(0, n == 0 ? 0 : n - 1) {
  require(n > 0, ErrorKind::InvalidArgument, "resampler: empty sample");
}

const std::vector<std::size_t>& Resampler::next() {
  for (auto& i : indices_) i = pick_(rng_);
  return indices_;
}

BootstrapResult bootstrap_mean_ci(std::span<const double> samples, std::size_t n_resamples,
                                  double level, std::uint64_t seed) {
  return mean_ci(samples, n_resamples, level, seed);
}

BootstrapResult paired_bootstrap_diff(std::span<const double> a, std::span<const double> b,
                                      std::size_t n_resamples, std::uint64_t seed, double level) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch, "paired bootstrap: length mismatch");
  std::vector<double> diffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
  return mean_ci(diffs, n_resamples, level, seed);
}

}  // namespace sgbench::stats
