#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heavytail/rng.hpp"

namespace heavytail {

enum class TailFamily { constant, pareto2, logpareto };

/// A symmetric innovation law together with its truncated second moment.
///
/// Every shipped family has the floored log-power form
///   H(x) = scale * ln(max(x, floor_point))^power,
/// which is what H becomes after the shift b -> H(x v (b+1)). The constant
/// family is the degenerate case power = 0 (Rademacher innovations, H = 1).
///
/// Instances are immutable and cheap to copy.
class TailModel {
 public:
  /// Coefficients of the floored log-power form of H.
  struct LogPowerForm {
    double scale = 1.0;
    int power = 0;
    double floor_point = 0.0;  // b + 1; H is constant below this point
  };

  static TailModel constant();
  static TailModel pareto2();
  static TailModel logpareto();

  /// Lookup by config name. Throws std::invalid_argument on unknown names.
  static TailModel from_name(std::string_view name);

  [[nodiscard]] TailFamily family() const noexcept { return family_; }
  [[nodiscard]] std::string_view name() const noexcept;

  /// E[xi^2 1{|xi| <= x}] without the flooring shift.
  [[nodiscard]] double h_raw(double x) const noexcept;

  /// b = inf{x >= 0 : h_raw(x) > 1}. Zero for the constant family, whose
  /// h_raw never exceeds 1.
  [[nodiscard]] double b_shift() const noexcept { return b_shift_; }

  /// h_raw(x v (b+1)); always >= 1.
  [[nodiscard]] double H(double x) const noexcept;

  [[nodiscard]] LogPowerForm log_power_form() const noexcept { return form_; }

  /// |xi| as a function of a uniform u in (0,1) through the inverse survival
  /// function: P(|xi| > magnitude(u)) = u.
  [[nodiscard]] double magnitude(double u) const noexcept;

  [[nodiscard]] double mean_abs() const noexcept;
  [[nodiscard]] bool infinite_variance() const noexcept {
    return family_ != TailFamily::constant;
  }

  /// P(|xi| > x).
  [[nodiscard]] double tail_prob(double x) const noexcept;
  /// E[|xi| 1{|xi| > x}].
  [[nodiscard]] double tail_abs_moment(double x) const noexcept;
  /// E[|xi|^3 1{|xi| <= x}].
  [[nodiscard]] double truncated_abs_third_moment(double x) const noexcept;

  /// A constant C with H(x) <= C * max(1, x)^q for all x >= 0, q > 0.
  [[nodiscard]] double power_bound(double q) const;

 private:
  TailModel(TailFamily family, double b_shift, LogPowerForm form)
      : family_(family), b_shift_(b_shift), form_(form) {}

  TailFamily family_;
  double b_shift_;
  LogPowerForm form_;
};

[[nodiscard]] inline double eval_H(const TailModel& model, double x) noexcept {
  return model.H(x);
}

/// One draw: magnitude by inverse transform, independent fair sign.
[[nodiscard]] double sample_xi(const TailModel& model, Rng& rng) noexcept;

/// eta_j = inf{s > 1 : H(s)/s^2 <= 1/j}, bracketed by doubling from 1 + 1e-12
/// and refined by bisection to 1e-10 relative. Throws std::runtime_error
/// if no bracket is found below 2^200.
[[nodiscard]] double eval_eta(const TailModel& model, std::int64_t j);

/// (1/N) sum xi_i^2 1{|xi_i| <= x}. Throws std::invalid_argument when empty.
[[nodiscard]] double empirical_H(std::span<const double> samples, double x);

struct DaEquivalenceRow {
  double x = 0.0;
  double r2 = 0.0;  // x^2 P(|xi| > x) / H(x)
  double r3 = 0.0;  // x E[|xi| 1{|xi| > x}] / H(x)
  double r4 = 0.0;  // E[|xi|^3 1{|xi| <= x}] / (x H(x))
  bool applicable = true;
};

/// Tail ratios whose decay to zero characterises slow variation of H.
/// Rows are flagged not applicable when the law has no tail mass.
[[nodiscard]] std::vector<DaEquivalenceRow> check_da_equivalences(
    const TailModel& model, std::span<const double> grid);

}  // namespace heavytail
