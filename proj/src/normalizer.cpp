#include "heavytail/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heavytail/numerics.hpp"

namespace heavytail {

ConditionSum::ConditionSum(std::span<const double> weights, const TailModel& model)
    : model_(model) {
  abs_sorted_.reserve(weights.size());
  for (double c : weights) {
    if (c != 0.0) abs_sorted_.push_back(std::abs(c));
  }
  std::sort(abs_sorted_.begin(), abs_sorted_.end());
  const int power = model_.log_power_form().power;
  for (int i = 0; i <= power; ++i) prefix_[i].assign(abs_sorted_.size() + 1, 0.0L);
  for (std::size_t k = 0; k < abs_sorted_.size(); ++k) {
    const long double c2 = static_cast<long double>(abs_sorted_[k]) * abs_sorted_[k];
    const long double lc = std::log(static_cast<long double>(abs_sorted_[k]));
    long double term = c2;
    for (int i = 0; i <= power; ++i) {
      prefix_[i][k + 1] = prefix_[i][k] + term;
      term *= lc;
    }
  }
  total_sq_ = abs_sorted_.empty() ? 0.0L : prefix_[0].back();
}

double ConditionSum::operator()(double s) const {
  const auto form = model_.log_power_form();
  if (form.power == 0) {
    return static_cast<double>(form.scale * total_sq_ / (static_cast<long double>(s) * s));
  }
  // Entries with s/|c| > floor_point see the log-power branch; the rest see H(0).
  const double cut = s / form.floor_point;
  const auto k = static_cast<std::size_t>(
      std::lower_bound(abs_sorted_.begin(), abs_sorted_.end(), cut) - abs_sorted_.begin());
  const long double h0 = model_.H(0.0);
  const long double ls = std::log(static_cast<long double>(s));
  long double low = 0.0L;
  if (form.power == 1) {
    low = ls * prefix_[0][k] - prefix_[1][k];
  } else {
    low = ls * ls * prefix_[0][k] - 2.0L * ls * prefix_[1][k] + prefix_[2][k];
  }
  const long double high = h0 * (total_sq_ - prefix_[0][k]);
  const long double total = form.scale * low + high;
  return static_cast<double>(total / (static_cast<long double>(s) * s));
}

double condition_sum_direct(std::span<const double> weights, const TailModel& model, double s) {
  CompensatedSum acc;
  for (double c : weights) {
    if (c == 0.0) continue;
    const double r = c / s;
    acc += r * r * model.H(s / std::abs(c));
  }
  return acc.value();
}

std::string_view to_string(NormalizerMethod m) noexcept {
  return m == NormalizerMethod::root_find ? "root-find" : "asymptotic";
}

NormalizerReport solve_Dn(std::span<const double> weights, const TailModel& model) {
  const ConditionSum g(weights, model);
  if (g.all_zero()) throw std::invalid_argument("solve_Dn: all-zero weights");
  auto crossed = [&](double s) { return g(s) <= 1.0; };

  const double sumsq = g.sum_of_squares();
  const double start = std::max(1.0, std::sqrt(sumsq));
  NormalizerReport rep;
  if (crossed(start)) {
    // H >= 1 forces g(s) > 1 below sqrt(sum c^2), so the start is the infimum.
    rep.D = start;
  } else {
    double lo = start;
    double hi = 2.0 * start;
    const double cap = std::ldexp(start, 200);
    while (!crossed(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > cap) throw std::runtime_error("solve_Dn: no convergence (doubling exceeded 2^200)");
    }
    double D = bisect_first_true(crossed, lo, hi, 1e-9);

    // g need not be monotone for exotic H: look for an earlier crossing.
    constexpr int kScan = 1000;
    const double log_lo = std::log(start);
    const double step = (std::log(D) - log_lo) / kScan;
    double prev = start;
    for (int i = 1; i < kScan; ++i) {
      const double p = std::exp(log_lo + step * i);
      if (p >= D) break;
      if (crossed(p)) {
        D = bisect_first_true(crossed, prev, p, 1e-9);
        break;
      }
      prev = p;
    }
    rep.D = D;
  }
  rep.method = NormalizerMethod::root_find;
  rep.residual = g(rep.D) - 1.0;
  rep.lower_bound_check = rep.D * rep.D >= sumsq * (1.0 - 1e-12);
  return rep;
}

namespace {

/// x^beta - (x-1)^beta without cancellation for x >= 2.
double power_gap(double x, double beta) {
  if (x < 2.0) return std::pow(x, beta) - std::pow(x - 1.0, beta);
  return -std::pow(x, beta) * std::expm1(beta * std::log1p(-1.0 / x));
}

}  // namespace

double calpha(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw std::domain_error("calpha: alpha must lie strictly inside (1/2, 1)");
  }
  const double beta = 1.0 - alpha;
  const double head = 1.0 / (3.0 - 2.0 * alpha);

  constexpr double kSplit = 1e6;
  auto integrand = [beta](double x) {
    const double g = power_gap(x, beta);
    return g * g;
  };
  CompensatedSum middle;
  int pieces = 0;
  for (double a = 1.0; a < kSplit; a *= 2.0) ++pieces;
  for (double a = 1.0; a < kSplit; a *= 2.0) {
    const double b = std::min(2.0 * a, kSplit);
    middle += integrate_adaptive(integrand, a, b, 1e-10 / pieces).value;
  }

  // (x^beta - (x-1)^beta)^2 = x^{2beta-2} (sum_k e_k x^{-k})^2 with
  // e_k = -binom(beta, k+1) (-1)^{k+1}; integrate term by term past kSplit.
  constexpr int kTerms = 10;
  double e[kTerms];
  e[0] = beta;
  for (int k = 1; k < kTerms; ++k) e[k] = e[k - 1] * (k - beta) / (k + 1);
  CompensatedSum tail;
  for (int k = 0; k < kTerms; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += e[i] * e[k - i];
    const double p = 2.0 * beta - 1.0 - k;
    tail += s * std::pow(kSplit, p) / (-p);
  }
  return (head + middle.value() + tail.value()) / (beta * beta);
}

double asymptotic_Dn_regvar(double alpha, const SlowlyVarying& L, std::int64_t n,
                            const TailModel& model) {
  if (n < 1) throw std::invalid_argument("asymptotic_Dn_regvar: n must be >= 1");
  const double c = calpha(alpha);
  const double eta = eval_eta(model, n);
  const double nd = static_cast<double>(n);
  const double l = L(nd);
  return std::sqrt(c * model.H(eta) * std::pow(nd, 3.0 - 2.0 * alpha) * l * l);
}

BnEstimate estimate_Bn(std::span<const double> statistic_samples) {
  if (statistic_samples.empty()) throw std::invalid_argument("estimate_Bn: empty sample");
  const double r = static_cast<double>(statistic_samples.size());
  CompensatedSum sum;
  for (double v : statistic_samples) sum += std::abs(v);
  const double mean = sum.value() / r;
  CompensatedSum ss;
  for (double v : statistic_samples) {
    const double d = std::abs(v) - mean;
    ss += d * d;
  }
  const double var = statistic_samples.size() > 1 ? ss.value() / (r - 1.0) : 0.0;
  const double k = std::sqrt(std::numbers::pi / 2.0);
  return {k * mean, k * std::sqrt(var / r)};
}

}  // namespace heavytail
