#include "heavytail/tail_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heavytail/numerics.hpp"

namespace heavytail {

TailModel TailModel::constant() {
  return TailModel(TailFamily::constant, 0.0, {1.0, 0, 0.0});
}

TailModel TailModel::pareto2() {
  const double b = std::exp(0.5);
  return TailModel(TailFamily::pareto2, b, {2.0, 1, b + 1.0});
}

TailModel TailModel::logpareto() {
  const double b = std::exp(1.0 / std::numbers::sqrt2);
  return TailModel(TailFamily::logpareto, b, {2.0, 2, b + 1.0});
}

TailModel TailModel::from_name(std::string_view name) {
  if (name == "constant") return constant();
  if (name == "pareto2") return pareto2();
  if (name == "logpareto") return logpareto();
  throw std::invalid_argument("unknown tail model '" + std::string(name) + "'");
}

std::string_view TailModel::name() const noexcept {
  switch (family_) {
    case TailFamily::constant: return "constant";
    case TailFamily::pareto2: return "pareto2";
    case TailFamily::logpareto: return "logpareto";
  }
  return "unknown";
}

double TailModel::h_raw(double x) const noexcept {
  if (x < 1.0) return 0.0;
  switch (family_) {
    case TailFamily::constant: return 1.0;
    case TailFamily::pareto2: return 2.0 * std::log(x);
    case TailFamily::logpareto: {
      const double l = std::log(x);
      return 2.0 * l * l;
    }
  }
  return 0.0;
}

double TailModel::H(double x) const noexcept {
  if (family_ == TailFamily::constant) return 1.0;
  return h_raw(std::max(x, form_.floor_point));
}

double TailModel::magnitude(double u) const noexcept {
  switch (family_) {
    case TailFamily::constant: return 1.0;
    case TailFamily::pareto2: return 1.0 / std::sqrt(u);
    case TailFamily::logpareto: {
      // Survival is (2y + 1) e^{-2y} with y = ln x. The residual below is
      // concave and decreasing in y, so Newton from the right is monotone.
      const double log_u = std::log(u);
      double y = std::max(1.3, -log_u);
      for (int it = 0; it < 200; ++it) {
        const double f = std::log1p(2.0 * y) - 2.0 * y - log_u;
        const double df = -4.0 * y / (2.0 * y + 1.0);
        if (df == 0.0) break;
        const double step = f / df;
        y -= step;
        if (y < 0.0) y = 0.0;
        if (std::abs(step) <= 1e-16 * std::max(1.0, y)) break;
      }
      return std::exp(y);
    }
  }
  return 1.0;
}

double TailModel::mean_abs() const noexcept {
  switch (family_) {
    case TailFamily::constant: return 1.0;
    case TailFamily::pareto2: return 2.0;
    case TailFamily::logpareto: return 4.0;
  }
  return 0.0;
}

double TailModel::tail_prob(double x) const noexcept {
  if (x < 1.0) return 1.0;
  switch (family_) {
    case TailFamily::constant: return 0.0;
    case TailFamily::pareto2: return 1.0 / (x * x);
    case TailFamily::logpareto: return (2.0 * std::log(x) + 1.0) / (x * x);
  }
  return 0.0;
}

double TailModel::tail_abs_moment(double x) const noexcept {
  if (x < 1.0) return mean_abs();
  switch (family_) {
    case TailFamily::constant: return 0.0;
    case TailFamily::pareto2: return 2.0 / x;
    case TailFamily::logpareto: return 4.0 * (std::log(x) + 1.0) / x;
  }
  return 0.0;
}

double TailModel::truncated_abs_third_moment(double x) const noexcept {
  if (x < 1.0) return 0.0;
  switch (family_) {
    case TailFamily::constant: return 1.0;
    case TailFamily::pareto2: return 2.0 * (x - 1.0);
    case TailFamily::logpareto: return 4.0 * (x * std::log(x) - x + 1.0);
  }
  return 0.0;
}

double TailModel::power_bound(double q) const {
  if (!(q > 0.0)) throw std::domain_error("power_bound: q must be positive");
  if (family_ == TailFamily::constant) return 1.0;
  // sup over x >= floor_point of scale * u^p e^{-q u}, u = ln x; the floor
  // region contributes H(0) itself.
  const double floor_value = H(0.0);
  const double u = std::max(std::log(form_.floor_point), form_.power / q);
  const double peak = form_.scale * std::pow(u, form_.power) * std::exp(-q * u);
  return std::max(floor_value, peak);
}

double sample_xi(const TailModel& model, Rng& rng) noexcept {
  const double mag = model.magnitude(rng.uniform_open());
  return rng.fair_sign() * mag;
}

double eval_eta(const TailModel& model, std::int64_t j) {
  if (j < 1) throw std::invalid_argument("eval_eta: j must be >= 1");
  const double level = 1.0 / static_cast<double>(j);
  auto below = [&](double s) { return model.H(s) / (s * s) <= level; };

  double lo = 1.0 + 1e-12;
  if (below(lo)) return lo;
  double hi = 2.0 * lo;
  const double cap = std::ldexp(1.0, 200);
  while (!below(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) throw std::runtime_error("eval_eta: no bracket below 2^200");
  }
  return bisect_first_true(below, lo, hi, 1e-10);
}

double empirical_H(std::span<const double> samples, double x) {
  if (samples.empty()) throw std::invalid_argument("empirical_H: empty sample");
  CompensatedSum acc;
  for (double v : samples) {
    if (std::abs(v) <= x) acc += v * v;
  }
  return acc.value() / static_cast<double>(samples.size());
}

std::vector<DaEquivalenceRow> check_da_equivalences(const TailModel& model,
                                                    std::span<const double> grid) {
  std::vector<DaEquivalenceRow> rows;
  rows.reserve(grid.size());
  for (double x : grid) {
    DaEquivalenceRow row;
    row.x = x;
    if (!model.infinite_variance() || x <= 0.0) {
      row.applicable = false;
      rows.push_back(row);
      continue;
    }
    const double h = model.H(x);
    row.r2 = x * x * model.tail_prob(x) / h;
    row.r3 = x * model.tail_abs_moment(x) / h;
    row.r4 = model.truncated_abs_third_moment(x) / (x * h);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace heavytail
