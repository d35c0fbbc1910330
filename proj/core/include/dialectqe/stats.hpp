#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dialectqe::stats {

// Per-run correlation metrics between predicted and gold scores.
struct MetricReport {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
};

// mean ± population-std summary across seeded runs.
struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t k = 0;
};

// Pearson correlation with population standard deviations. Inputs must have
// equal length >= 2 and nonzero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; ties receive the average of the ranks they span.
std::vector<double> ranks(std::span<const double> values);

// Spearman rank correlation, computed as Pearson over average ranks so tied
// predictions are handled.
double spearman(std::span<const double> x, std::span<const double> y);

Aggregate aggregate(const std::vector<double>& values);

}  // namespace dialectqe::stats
