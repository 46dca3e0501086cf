#include "heavytail/gof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heavytail/numerics.hpp"

namespace heavytail {

namespace {

std::vector<double> sorted_copy(std::span<const double> sample, const char* who) {
  if (sample.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  if (std::any_of(xs.begin(), xs.end(), [](double v) { return std::isnan(v); })) {
    throw std::invalid_argument(std::string(who) + ": sample contains NaN");
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

double quantile_sorted(const std::vector<double>& xs, double p) {
  const double h = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace

double ks_normal(std::span<const double> sample) {
  const auto xs = sorted_copy(sample, "ks_normal");
  const double r = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / r - f, f - static_cast<double>(i) / r});
  }
  return std::clamp(d, 0.0, 1.0);
}

double cvm_normal(std::span<const double> sample) {
  const auto xs = sorted_copy(sample, "cvm_normal");
  const double r = static_cast<double>(xs.size());
  CompensatedSum acc;
  acc += 1.0 / (12.0 * r);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = normal_cdf(xs[i]) - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * r);
    acc += e * e;
  }
  return acc.value();
}

double ks_critical_95(std::size_t count) {
  if (count == 0) throw std::invalid_argument("ks_critical_95: zero count");
  return 1.36 / std::sqrt(static_cast<double>(count));
}

Summary summarize(std::span<const double> sample) {
  const auto xs = sorted_copy(sample, "summarize");
  Summary s;
  s.count = xs.size();
  const double r = static_cast<double>(xs.size());
  CompensatedSum sum;
  for (double v : sample) sum += v;
  s.mean = sum.value() / r;
  CompensatedSum ss;
  for (double v : sample) ss += (v - s.mean) * (v - s.mean);
  s.variance = xs.size() > 1 ? ss.value() / (r - 1.0) : 0.0;
  s.sd = std::sqrt(s.variance);
  s.min = xs.front();
  s.max = xs.back();
  s.q25 = quantile_sorted(xs, 0.25);
  s.median = quantile_sorted(xs, 0.5);
  s.q75 = quantile_sorted(xs, 0.75);
  return s;
}

std::vector<HistogramBin> histogram(std::span<const double> sample, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram: bins must be positive");
  const auto xs = sorted_copy(sample, "histogram");
  const double lo = xs.front();
  double hi = xs.back();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("histogram: non-finite sample values");
  }
  if (hi == lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : xs) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

}  // namespace heavytail
