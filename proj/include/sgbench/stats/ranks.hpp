#pragma once

#include <optional>
#include <span>
#include <vector>

namespace sgbench::stats {

/// 1-based ranks with ties assigned their average rank.
std::vector<double> midranks(std::span<const double> values);

double pearson_unchecked(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of midranks. nullopt when either variable has zero rank variance.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sgbench::stats
