#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>

namespace heavytail {

/// Neumaier's variant of Kahan summation. Order-dependent but far less
/// sensitive to cancellation than naive accumulation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x) noexcept;

/// Inverse of the standard normal CDF on (0,1). Acklam's rational
/// approximation followed by one Halley step; relative error near 1e-15.
[[nodiscard]] double normal_quantile(double p);

/// Bisection for the first point where a monotone predicate flips to true.
/// Requires !pred(lo) and pred(hi). Returns a point where pred is true, within
/// rel_tol * hi of the crossing.
template <class Pred>
double bisect_first_true(Pred&& pred, double lo, double hi, double rel_tol,
                         int max_iter = 400) {
  for (int it = 0; it < max_iter && (hi - lo) > rel_tol * hi; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    std::size_t max_intervals = 20000);

/// Upper bound on the integral of x^{-gamma} (1 + ln x)^r over [x0, inf),
/// gamma > 1, x0 >= 1. Exact for r = 0.
[[nodiscard]] double power_log_tail_integral(double x0, double gamma, double r);

}  // namespace heavytail
