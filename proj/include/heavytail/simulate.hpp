#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "heavytail/convolution.hpp"
#include "heavytail/innovations.hpp"
#include "heavytail/weights.hpp"

namespace heavytail {

/// Statistics of one replication. Quantities that need a normalizer or a
/// path are NaN when not available.
struct PathStatistics {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  double S = 0.0;
  double V_raikov = 0.0;
  double V_path = kNaN;
  double T_D = kNaN;
  double T_self = kNaN;
  double ratio_LLN = kNaN;
  std::int64_t n = 0;
  std::string weights_meta;
  /// |S_path - S_window| / max(|S|, V_raikov); zero for plain weighted sums.
  double representation_gap = 0.0;

  [[nodiscard]] bool self_defined() const noexcept { return V_raikov > 0.0; }
};

/// S = sum c_k xi_k over the array, drawing xi for every index in order.
/// With D, also fills T_D = S / D and ratio_LLN = V_raikov^2 / D^2.
[[nodiscard]] PathStatistics weighted_sum(const WeightArray& weights, InnovationStream& stream,
                                          std::optional<double> D = std::nullopt);

/// Same statistics for a given innovation path (one value per weight).
[[nodiscard]] PathStatistics weighted_sum(const WeightArray& weights,
                                          std::span<const double> innovations,
                                          std::optional<double> D = std::nullopt);

/// Precomputed truncation window and convolution kernel for S_n = X_1 + ... + X_n.
///
/// Innovations are drawn over the window indices [origin, J]. X_k uses lags
/// up to J + k with xi_j = 0 for j > J, which is exactly the truncation the
/// window form applies, so both sums see the same draws and the same cut.
class LinearProcessPlan {
 public:
  /// Maximum tolerated relative gap between path and window forms.
  static constexpr double kGapTolerance = 1e-8;

  LinearProcessPlan(const CoefficientSpec& spec, std::int64_t n, const TailModel& model,
                    WindowOptions opts = {},
                    std::optional<ConvolutionMethod> method = std::nullopt);

  [[nodiscard]] const CoefficientSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::int64_t n() const noexcept { return n_; }
  [[nodiscard]] const WeightArray& window() const noexcept { return window_; }
  [[nodiscard]] ConvolutionMethod method() const noexcept { return corr_.method(); }
  [[nodiscard]] std::size_t kernel_length() const noexcept { return corr_.coeff_len(); }

  /// X_1 .. X_n for the given innovations over the window indices.
  [[nodiscard]] std::vector<double> path(std::span<const double> innovations) const;

 private:
  CoefficientSpec spec_;
  std::int64_t n_;
  WeightArray window_;
  CrossCorrelator corr_;
};

/// Both representations of S_n on one draw. Statistics come from the window
/// form; V_path from the path. Throws std::runtime_error when the two sums
/// disagree beyond kGapTolerance.
[[nodiscard]] PathStatistics linear_process_path(const LinearProcessPlan& plan,
                                                 InnovationStream& stream,
                                                 std::optional<double> D = std::nullopt);

/// Both representations for a given innovation path over the window indices.
[[nodiscard]] PathStatistics linear_process_path(const LinearProcessPlan& plan,
                                                 std::span<const double> innovations,
                                                 std::optional<double> D = std::nullopt);

/// Convenience overload building a one-off plan.
[[nodiscard]] PathStatistics linear_process_path(const CoefficientSpec& spec, std::int64_t n,
                                                 InnovationStream& stream, WindowOptions opts = {},
                                                 std::optional<double> D = std::nullopt);

struct KulikResult {
  double T_kulik = 0.0;
  double target_var = 0.0;
};

/// (sum a)^2 / sum a^2 for an absolutely summable (explicit) spec.
[[nodiscard]] double kulik_target_variance(const CoefficientSpec& spec);

/// S / V_path with its limiting variance. Throws std::domain_error for long
/// memory specs and std::invalid_argument when V_path is not positive.
[[nodiscard]] KulikResult kulik_statistic(const PathStatistics& path, const CoefficientSpec& spec);

/// Constants of the Peligrad-Sang normalization for a causal regvar spec.
struct PeligradSangConstants {
  double A2 = 0.0;       // sum_{i>=1} a_i^2
  double c_alpha = 0.0;
  double a_n = 0.0;
  std::int64_t n = 0;

  static PeligradSangConstants compute(const CoefficientSpec& spec, std::int64_t n);
};

/// A^2 sum b^2 xi^2 / (c_alpha n^2 a_n^2 V_path^2).
[[nodiscard]] double peligrad_sang_ratio(const PathStatistics& path,
                                         const PeligradSangConstants& k);
[[nodiscard]] double peligrad_sang_ratio(const PathStatistics& path, const CoefficientSpec& spec,
                                         std::int64_t n);

/// sum_{i >= first_lag} a_i^2: exact for explicit specs, a direct sum plus an
/// Euler-Maclaurin tail for regvar.
[[nodiscard]] double coefficient_square_sum(const CoefficientSpec& spec);

}  // namespace heavytail
