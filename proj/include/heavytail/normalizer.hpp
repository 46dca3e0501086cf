#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "heavytail/tail_model.hpp"
#include "heavytail/weights.hpp"

namespace heavytail {

/// g(s) = sum_k (c_k^2 / s^2) H(s / |c_k|), the function whose first crossing
/// of 1 defines D_n.
///
/// Construction sorts |c_k| and keeps prefix sums of c^2 ln^i |c| so that
/// each evaluation is O(log m) for the floored log-power H family.
class ConditionSum {
 public:
  ConditionSum(std::span<const double> weights, const TailModel& model);

  [[nodiscard]] double operator()(double s) const;
  [[nodiscard]] double sum_of_squares() const noexcept { return static_cast<double>(total_sq_); }
  [[nodiscard]] bool all_zero() const noexcept { return abs_sorted_.empty(); }

 private:
  TailModel model_;
  std::vector<double> abs_sorted_;
  // prefix_[i][k] = sum_{j<k} c_j^2 ln^i |c_j| over the sorted order.
  std::vector<long double> prefix_[3];
  long double total_sq_ = 0.0L;
};

/// Term-by-term evaluation of g(s). Reference for ConditionSum.
[[nodiscard]] double condition_sum_direct(std::span<const double> weights,
                                          const TailModel& model, double s);

enum class NormalizerMethod { root_find, asymptotic };

[[nodiscard]] std::string_view to_string(NormalizerMethod m) noexcept;

struct NormalizerReport {
  double D = 1.0;
  NormalizerMethod method = NormalizerMethod::root_find;
  double residual = 0.0;  // g(D) - 1, <= 0
  bool lower_bound_check = true;  // D^2 >= sum c_k^2
};

/// D = inf{s >= 1 : g(s) <= 1}: doubling from max(1, ||c||_2) then bisection
/// to 1e-9 relative, followed by a 1000-point log-grid scan of [||c||, D]
/// that re-brackets if an earlier crossing exists.
/// Throws std::invalid_argument for all-zero weights and std::runtime_error
/// if doubling passes 2^200 times the start.
[[nodiscard]] NormalizerReport solve_Dn(std::span<const double> weights, const TailModel& model);

/// (1 - alpha)^{-2} int_0^inf [x^{1-alpha} - max(x-1, 0)^{1-alpha}]^2 dx.
/// Closed form on [0,1], adaptive Gauss-Kronrod on [1, 1e6] and an
/// asymptotic series for the remainder. alpha in (1/2, 1).
[[nodiscard]] double calpha(double alpha);

/// sqrt(c_alpha H(eta_n) n^{3 - 2 alpha} L(n)^2).
[[nodiscard]] double asymptotic_Dn_regvar(double alpha, const SlowlyVarying& L, std::int64_t n,
                                          const TailModel& model);

struct BnEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// sqrt(pi/2) times the sample mean of |S| over independent replicates.
[[nodiscard]] BnEstimate estimate_Bn(std::span<const double> statistic_samples);

}  // namespace heavytail
