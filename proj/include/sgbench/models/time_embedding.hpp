#pragma once

#include <cstddef>
#include <vector>

namespace sgbench::models {

/// Sinusoidal embedding of a normalized time increment tau = dt / t_max.
///
/// Entries are [sin(tau w_0), cos(tau w_0), ..., sin(tau w_{h-1}), cos(tau w_{h-1})]
/// with h = dim/2 and w_i = 2 pi * max_period^(-i/(h-1)), i.e. geometric from
/// 2 pi down to 2 pi / max_period.
struct TimeEmbedding {
  std::size_t dim = 32;
  double max_period = 100.0;

  void validate() const;
  double frequency(std::size_t i) const;
  std::vector<double> operator()(double tau) const;
  /// Writes dim entries into out.
  void embed_into(double tau, double* out) const;
};

}  // namespace sgbench::models
