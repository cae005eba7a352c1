#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "sgbench/stats/bootstrap.hpp"

namespace sgbench::stats {

enum class WilcoxonMethod { Auto, Exact, Normal };

/// Sample sizes up to this use the exact null distribution under Auto.
inline constexpr std::size_t kWilcoxonExactMax = 20;

struct WilcoxonResult {
  /// Sum of midranks of the positive differences.
  double statistic = 0.0;
  double p_value = 1.0;
  /// Differences left after dropping zeros.
  std::size_t n = 0;
  bool exact = false;
};

/// Two-sided signed-rank test. Zeros are dropped before ranking; nullopt if nothing remains.
std::optional<WilcoxonResult> wilcoxon_signed_rank(std::span<const double> diffs,
                                                   WilcoxonMethod method = WilcoxonMethod::Auto);

/// mean(a - b) / sample_std(a - b). nullopt for zero difference variance.
std::optional<double> cohens_d_paired(std::span<const double> a, std::span<const double> b);

struct AssociationResult {
  double spearman_rho = 0.0;
  double rho_ci_low = 0.0;
  double rho_ci_high = 0.0;
  std::size_t n_points = 0;
  std::size_t n_resamples = 0;
  /// Resamples whose rank correlation was undefined and therefore skipped.
  std::size_t degenerate_resamples = 0;
  std::uint64_t seed = 0;
};

/// Spearman correlation over pooled points with a percentile CI from resampling points.
/// nullopt when the correlation itself is undefined.
std::optional<AssociationResult> pooled_association(std::span<const double> x,
                                                    std::span<const double> y,
                                                    std::size_t n_resamples = kDefaultResamples,
                                                    std::uint64_t seed = 0, double level = 0.95);

}  // namespace sgbench::stats
