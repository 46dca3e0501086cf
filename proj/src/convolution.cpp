#include "heavytail/convolution.hpp"

#include <algorithm>
#include <bit>
#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace heavytail {

std::string_view to_string(ConvolutionMethod m) noexcept {
  return m == ConvolutionMethod::direct ? "direct" : "transform";
}

namespace {

// FFTW's planner is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealDeleter {
  void operator()(double* p) const noexcept { fftw_free(p); }
};
struct ComplexDeleter {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], RealDeleter>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], ComplexDeleter>;

RealBuffer alloc_real(std::size_t n) {
  RealBuffer p(fftw_alloc_real(n));
  if (!p) throw std::bad_alloc();
  return p;
}

ComplexBuffer alloc_complex(std::size_t n) {
  ComplexBuffer p(fftw_alloc_complex(n));
  if (!p) throw std::bad_alloc();
  return p;
}

}  // namespace

struct CrossCorrelator::Spectral {
  std::size_t size = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ComplexBuffer coeff_spectrum;

  Spectral(std::span<const double> coeffs, std::size_t out_len) {
    size = std::bit_ceil(coeffs.size() + out_len - 1);
    const std::size_t bins = size / 2 + 1;
    RealBuffer real = alloc_real(size);
    ComplexBuffer spec = alloc_complex(bins);
    coeff_spectrum = alloc_complex(bins);
    {
      std::lock_guard lock(planner_mutex());
      forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), real.get(), spec.get(), FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spec.get(), real.get(), FFTW_ESTIMATE);
    }
    if (!forward || !backward) throw std::runtime_error("FFTW planning failed");
    std::fill(real.get(), real.get() + size, 0.0);
    std::copy(coeffs.begin(), coeffs.end(), real.get());
    fftw_execute_dft_r2c(forward, real.get(), coeff_spectrum.get());
  }

  ~Spectral() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;
};

CrossCorrelator::CrossCorrelator(std::vector<double> coeffs, std::size_t out_len,
                                 ConvolutionMethod method)
    : coeffs_(std::move(coeffs)), out_len_(out_len), method_(method) {
  if (coeffs_.empty()) throw std::invalid_argument("CrossCorrelator: empty coefficients");
  if (method_ == ConvolutionMethod::transform && out_len_ > 0) {
    spectral_ = std::make_shared<const Spectral>(coeffs_, out_len_);
  }
}

ConvolutionMethod CrossCorrelator::choose(std::size_t out_len, std::size_t coeff_len) noexcept {
  const double work = static_cast<double>(out_len) * static_cast<double>(coeff_len);
  return work > kTransformThreshold ? ConvolutionMethod::transform : ConvolutionMethod::direct;
}

void CrossCorrelator::apply(std::span<const double> signal, std::span<double> out) const {
  if (out.size() != out_len_) throw std::invalid_argument("CrossCorrelator: output size mismatch");
  if (out_len_ == 0) return;

  if (method_ == ConvolutionMethod::direct) {
    const std::size_t L = coeffs_.size();
    for (std::size_t k = 0; k < out_len_; ++k) {
      if (k >= signal.size()) {
        out[k] = 0.0;
        continue;
      }
      const std::size_t len = std::min(L, signal.size() - k);
      const double* z = signal.data() + k;
      double acc = 0.0;
      for (std::size_t p = 0; p < len; ++p) acc += coeffs_[p] * z[p];
      out[k] = acc;
    }
    return;
  }

  const Spectral& sp = *spectral_;
  const std::size_t bins = sp.size / 2 + 1;
  RealBuffer real = alloc_real(sp.size);
  ComplexBuffer spec = alloc_complex(bins);
  const std::size_t used = std::min(signal.size(), sp.size);
  std::copy_n(signal.begin(), used, real.get());
  std::fill(real.get() + used, real.get() + sp.size, 0.0);
  fftw_execute_dft_r2c(sp.forward, real.get(), spec.get());
  // Correlation: conj(C) * Z.
  for (std::size_t i = 0; i < bins; ++i) {
    const double cr = sp.coeff_spectrum[i][0];
    const double ci = -sp.coeff_spectrum[i][1];
    const double zr = spec[i][0];
    const double zi = spec[i][1];
    spec[i][0] = cr * zr - ci * zi;
    spec[i][1] = cr * zi + ci * zr;
  }
  fftw_execute_dft_c2r(sp.backward, spec.get(), real.get());
  const double inv = 1.0 / static_cast<double>(sp.size);
  for (std::size_t k = 0; k < out_len_; ++k) out[k] = real[k] * inv;
}

}  // namespace heavytail
