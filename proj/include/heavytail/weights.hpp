#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heavytail/tail_model.hpp"

namespace heavytail {

/// L(x) = constant * (1 + ln x)^log_power. Positive for x >= 1 and slowly
/// varying in the strong sense.
struct SlowlyVarying {
  double constant = 1.0;
  double log_power = 0.0;

  [[nodiscard]] double operator()(double x) const noexcept;
};

/// Generator of the linear-process coefficients a_l.
///
/// Lags follow X_k = sum_j a_{k+j} xi_j. Regularly varying coefficients live
/// on lags >= 1, fractional ones on lags >= 0 (a_0 = 1), explicit lists on
/// [first_lag, first_lag + size - 1] where first_lag may be negative.
class CoefficientSpec {
 public:
  enum class Kind { explicit_list, regvar, fractional };

  /// Decreasing upper envelope a_l <= scale * l^{-exponent} (1 + ln l)^log_power,
  /// valid and decreasing for l >= decreasing_from.
  struct Envelope {
    double scale = 1.0;
    double exponent = 1.0;
    double log_power = 0.0;
    double decreasing_from = 1.0;

    [[nodiscard]] double operator()(double l) const noexcept;
  };

  static CoefficientSpec explicit_list(std::vector<double> values, std::int64_t first_lag = 1);
  /// alpha in (1/2, 1); throws std::domain_error otherwise.
  static CoefficientSpec regvar(double alpha, SlowlyVarying L = {});
  /// d in (0, 1/2); throws std::domain_error otherwise.
  static CoefficientSpec fractional(double d);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] bool finite() const noexcept { return kind_ == Kind::explicit_list; }
  [[nodiscard]] std::int64_t first_lag() const noexcept { return first_lag_; }
  /// Last nonzero lag; only meaningful for explicit lists.
  [[nodiscard]] std::int64_t last_lag() const noexcept;

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] const SlowlyVarying& slowly_varying() const noexcept { return L_; }
  [[nodiscard]] double d() const noexcept { return d_; }

  /// a_l for l = first_lag .. first_lag + count - 1 (zeros past an explicit list).
  [[nodiscard]] std::vector<double> coefficients(std::size_t count) const;

  /// Single coefficient a_l; zero outside the support. O(l) for fractional.
  [[nodiscard]] double coefficient(std::int64_t lag) const;

  /// Only for infinite kinds.
  [[nodiscard]] Envelope envelope() const;

  [[nodiscard]] std::string describe() const;

 private:
  CoefficientSpec() = default;

  Kind kind_ = Kind::explicit_list;
  std::vector<double> values_;
  std::int64_t first_lag_ = 1;
  double alpha_ = 0.0;
  SlowlyVarying L_{};
  double d_ = 0.0;
};

/// Sequential a_l generator; avoids re-deriving the Gamma recurrence.
class CoefficientStream {
 public:
  explicit CoefficientStream(const CoefficientSpec& spec);
  double next();

 private:
  const CoefficientSpec* spec_;
  std::int64_t lag_;
  std::size_t index_ = 0;
  double last_ = 1.0;
};

/// a_0 .. a_{count-1} of (1 - B)^{-d} by a_i = a_{i-1} (i - 1 + d) / i.
[[nodiscard]] std::vector<double> fractional_coeffs(double d, std::size_t count);

/// One row c_1..c_m of a triangular array, or a window of b_nj.
/// entries[k] is the weight of xi at index origin + k.
struct WeightArray {
  std::vector<double> entries;
  std::int64_t origin = 0;
  /// Omitted condition mass over the kept sum of squares; 0 when exact.
  double truncation_tail_bound = 0.0;
  std::string meta;

  [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
  [[nodiscard]] std::int64_t last_index() const noexcept {
    return origin + static_cast<std::int64_t>(entries.size()) - 1;
  }
  /// Weight at index j, zero outside the window.
  [[nodiscard]] double at(std::int64_t j) const noexcept;
};

struct WindowOptions {
  double eps_tail = 1e-6;
  std::int64_t max_window = 100'000'000;
};

/// b_nj = a_{j+1} + ... + a_{j+n} over every j where it can be nonzero.
///
/// Computed from prefix sums A_j so each entry is O(1). Explicit specs are
/// exact. For infinite specs the window is cut at the smallest J whose
/// omitted mass sum_{j>J} b_nj^2 H(1/|b_nj|), bounded analytically past the
/// streamed range, is at most eps_tail * sum_{j<=J} b_nj^2. Throws
/// std::runtime_error when that cannot be certified within max_window.
[[nodiscard]] WeightArray window_sums(const CoefficientSpec& spec, std::int64_t n,
                                      const TailModel& model, WindowOptions opts = {});

/// Causal-form convenience: b_ni = a_{max(first_lag, i-n+1)} + ... + a_i, the
/// weight of xi_{n-i} in X_1 + ... + X_n.
[[nodiscard]] double causal_window_sum(const CoefficientSpec& spec, std::int64_t n,
                                       std::int64_t i);

/// c^2 H(1/|c|), with the zero-weight convention.
[[nodiscard]] inline double condition_term(double c, const TailModel& model) noexcept {
  if (c == 0.0) return 0.0;
  return c * c * model.H(1.0 / std::abs(c));
}

struct Coeff0Check {
  bool converges = false;
  double partial = 0.0;
  double tail_bound = 0.0;
};

/// sum_l a_l^2 H(1/|a_l|): partial sum over `terms` lags plus an integral
/// bound using H(x) <= C x^q for the rest. Inconclusive tails report
/// converges = false with an infinite bound.
[[nodiscard]] Coeff0Check check_coeff0(const CoefficientSpec& spec, const TailModel& model,
                                       std::int64_t terms = 1'000'000);

struct GenCheck {
  double sum_cond = 0.0;
  double max_cond = 0.0;
};

[[nodiscard]] GenCheck check_gen(std::span<const double> weights, const TailModel& model);

/// max_k (c_k^2 / D^2) H(D / |c_k|). Requires D >= 1.
[[nodiscard]] double check_coeffD(std::span<const double> weights, const TailModel& model,
                                  double D);

/// Exponent q used in the tail bounds H(x) <= C x^q, chosen so that
/// (2 - q) * exponent > 1.
[[nodiscard]] double tail_power_for(double exponent) noexcept;

}  // namespace heavytail
