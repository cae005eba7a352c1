#include "sgbench/models/time_embedding.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sgbench/core/error.hpp"

namespace sgbench::models {

void TimeEmbedding::validate() const {
  require(dim >= 2 && dim % 2 == 0, ErrorKind::InvalidArgument,
          "time embedding: dim must be even and positive, got " + std::to_string(dim));
  require(max_period > 0.0, ErrorKind::InvalidArgument, "time embedding: max_period must be > 0");
}

double TimeEmbedding::frequency(std::size_t i) const {
  const std::size_t half = dim / 2;
  if (half == 1) return 2.0 * std::numbers::pi;
  const double frac = static_cast<double>(i) / static_cast<double>(half - 1);
  return 2.0 * std::numbers::pi * std::pow(max_period, -frac);
}

void TimeEmbedding::embed_into(double tau, double* out) const {
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double a = tau * frequency(i);
    out[2 * i] = std::sin(a);
    out[2 * i + 1] = std::cos(a);
  }
}

std::vector<double> TimeEmbedding::operator()(double tau) const {
  validate();
  std::vector<double> e(dim);
  embed_into(tau, e.data());
  return e;
}

}  // namespace sgbench::models
