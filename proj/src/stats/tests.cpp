#include "sgbench/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sgbench/core/error.hpp"
#include "sgbench/stats/ranks.hpp"

namespace sgbench::stats {
namespace {

// Two-sided p from the exact null distribution of W+ over all 2^n sign patterns.
// Doubled midranks are integers, so the distribution is a subset-sum count.
double exact_p(const std::vector<double>& ranks, double w) {
  std::vector<std::size_t> doubled;
  std::size_t total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<double> counts(total + 1, 0.0);
  counts[0] = 1.0;
  for (std::size_t r : doubled) {
    for (std::size_t s = total; s >= r; --s) {
      counts[s] += counts[s - r];
      if (s == r) break;
    }
  }
  const double n_patterns = std::ldexp(1.0, static_cast<int>(ranks.size()));
  const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w));
  double lower = 0.0, upper = 0.0;
  for (std::size_t s = 0; s <= total; ++s) {
    if (s <= w2) lower += counts[s];
    if (s >= w2) upper += counts[s];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / n_patterns);
}

double normal_p(const std::vector<double>& abs_diffs, const std::vector<double>& ranks, double w) {
  const double n = static_cast<double>(ranks.size());
  const double mu = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::map<double, double> ties;
  for (double a : abs_diffs) ties[a] += 1.0;
  for (const auto& [value, t] : ties) var -= (t * t * t - t) / 48.0;
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(w - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace

std::optional<WilcoxonResult> wilcoxon_signed_rank(std::span<const double> diffs,
                                                   WilcoxonMethod method) {
  std::vector<double> nonzero;
  for (double d : diffs) {
    require(std::isfinite(d), ErrorKind::NonFinite, "wilcoxon: non-finite difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) return std::nullopt;

  std::vector<double> abs_diffs(nonzero.size());
  std::transform(nonzero.begin(), nonzero.end(), abs_diffs.begin(),
                 [](double d) { return std::abs(d); });
  const auto ranks = midranks(abs_diffs);

  WilcoxonResult r;
  r.n = nonzero.size();
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    if (nonzero[i] > 0.0) r.statistic += ranks[i];
  }
  r.exact = method == WilcoxonMethod::Exact ||
            (method == WilcoxonMethod::Auto && r.n <= kWilcoxonExactMax);
  require(!r.exact || r.n <= 62, ErrorKind::InvalidArgument, "wilcoxon: exact test limited to n <= 62");
  r.p_value = r.exact ? exact_p(ranks, r.statistic) : normal_p(abs_diffs, ranks, r.statistic);
  return r;
}

std::optional<double> cohens_d_paired(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch, "cohens_d: length mismatch");
  require(a.size() >= 2, ErrorKind::InvalidArgument, "cohens_d: need at least 2 pairs");
  const double n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double m = 0.0;
  for (double v : d) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : d) ss += (v - m) * (v - m);
  if (!(ss > 0.0)) return std::nullopt;
  return m / std::sqrt(ss / (n - 1.0));
}

std::optional<AssociationResult> pooled_association(std::span<const double> x,
                                                    std::span<const double> y,
                                                    std::size_t n_resamples, std::uint64_t seed,
                                                    double level) {
  const auto rho = spearman(x, y);
  if (!rho) return std::nullopt;
  AssociationResult r;
  r.spearman_rho = *rho;
  r.n_points = x.size();
  r.n_resamples = n_resamples;
  r.seed = seed;

  Resampler resampler(x.size(), seed);
  std::vector<double> rhos;
  rhos.reserve(n_resamples);
  std::vector<double> xs(x.size()), ys(y.size());
  for (std::size_t b = 0; b < n_resamples; ++b) {
    const auto& idx = resampler.next();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs[i] = x[idx[i]];
      ys[i] = y[idx[i]];
    }
    if (const auto v = spearman(xs, ys)) {
      rhos.push_back(*v);
    } else {
      ++r.degenerate_resamples;
    }
  }
  if (rhos.empty()) {
    r.rho_ci_low = r.rho_ci_high = r.spearman_rho;
    return r;
  }
  std::sort(rhos.begin(), rhos.end());
  const double alpha = 0.5 * (1.0 - level);
  r.rho_ci_low = quantile_sorted(rhos, alpha);
  r.rho_ci_high = quantile_sorted(rhos, 1.0 - alpha);
  return r;
}

}  // namespace sgbench::stats
