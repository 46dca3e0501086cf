#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heavytail {

/// sup_x |F_R(x) - Phi(x)| by the order-statistic formula
/// max_i max(i/R - Phi(x_(i)), Phi(x_(i)) - (i-1)/R). Throws on empty input
/// or NaN entries.
[[nodiscard]] double ks_normal(std::span<const double> sample);

/// Cramer-von Mises W^2 = 1/(12R) + sum_i (Phi(x_(i)) - (2i-1)/(2R))^2.
[[nodiscard]] double cvm_normal(std::span<const double> sample);

/// Asymptotic 95% KS critical value 1.36 / sqrt(R).
[[nodiscard]] double ks_critical_95(std::size_t count);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single value
  double sd = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;

  [[nodiscard]] double iqr() const noexcept { return q75 - q25; }
};

/// Quantiles use linear interpolation between order statistics
/// (type 7). Throws on empty input.
[[nodiscard]] Summary summarize(std::span<const double> sample);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the top edge is inclusive.
[[nodiscard]] std::vector<HistogramBin> histogram(std::span<const double> sample, std::size_t bins);

}  // namespace heavytail
