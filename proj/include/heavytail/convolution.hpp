#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace heavytail {

enum class ConvolutionMethod { direct, transform };

[[nodiscard]] std::string_view to_string(ConvolutionMethod m) noexcept;

/// out[k] = sum_p coeffs[p] * signal[p + k] for k < out_len, with the signal
/// taken as zero past its end.
///
/// The transform path zero-pads to N >= coeffs + out_len - 1 so the circular
/// correlation never wraps. The coefficient spectrum is computed once; apply()
/// is const and may run concurrently from several threads.
class CrossCorrelator {
 public:
  /// Work threshold (out_len * coeffs) above which transform is preferred.
  static constexpr double kTransformThreshold = 16777216.0;  // 2^24

  CrossCorrelator(std::vector<double> coeffs, std::size_t out_len, ConvolutionMethod method);

  [[nodiscard]] static ConvolutionMethod choose(std::size_t out_len, std::size_t coeff_len) noexcept;

  void apply(std::span<const double> signal, std::span<double> out) const;

  [[nodiscard]] ConvolutionMethod method() const noexcept { return method_; }
  [[nodiscard]] std::size_t out_len() const noexcept { return out_len_; }
  [[nodiscard]] std::size_t coeff_len() const noexcept { return coeffs_.size(); }

 private:
  struct Spectral;

  std::vector<double> coeffs_;
  std::size_t out_len_;
  ConvolutionMethod method_;
  std::shared_ptr<const Spectral> spectral_;
};

}  // namespace heavytail
