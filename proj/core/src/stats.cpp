#include "dialectqe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dialectqe/errors.hpp"

namespace dialectqe::stats {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    raise(ErrorKind::validation, "pearson: length mismatch");
  if (x.size() < 2)
    raise(ErrorKind::validation, "pearson: need at least 2 samples");

  const double mx = mean_of(x);
  const double my = mean_of(y);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0)
    raise(ErrorKind::degenerate, "pearson: zero variance input");
  return cov / (std::sqrt(vx) * std::sqrt(vy));
}

std::vector<double> ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> out(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j share a value; average of 1-based ranks i+1..j+1
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = avg_rank;
    i = j + 1;
  }
  return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    raise(ErrorKind::validation, "spearman: length mismatch");
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  return pearson(rx, ry);
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty())
    raise(ErrorKind::validation, "aggregate: empty input");
  Aggregate a;
  a.k = values.size();
  a.mean = mean_of(values);
  double var = 0.0;
  for (double v : values) {
    const double d = v - a.mean;
    var += d * d;
  }
  a.stddev = std::sqrt(var / static_cast<double>(values.size()));
  return a;
}

}  // namespace dialectqe::stats
