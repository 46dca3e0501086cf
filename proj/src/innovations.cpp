#include "heavytail/innovations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "heavytail/numerics.hpp"

namespace heavytail {

std::string_view to_string(Flavor f) noexcept {
  switch (f) {
    case Flavor::iid: return "iid";
    case Flavor::mds_sign: return "mds-sign";
    case Flavor::m_dependent: return "m-dependent";
    case Flavor::degenerate: return "degenerate";
  }
  return "unknown";
}

Flavor flavor_from_string(std::string_view name) {
  if (name == "iid") return Flavor::iid;
  if (name == "mds-sign") return Flavor::mds_sign;
  if (name == "m-dependent") return Flavor::m_dependent;
  if (name == "degenerate") return Flavor::degenerate;
  throw std::invalid_argument("unknown innovation flavor '" + std::string(name) + "'");
}

InnovationStream::InnovationStream(TailModel model, InnovationConfig config,
                                   std::uint64_t seed, std::uint64_t stream_id)
    : model_(model),
      config_(config),
      seed_(seed),
      stream_id_(stream_id),
      rng_(mix_stream(seed, stream_id)) {
  if (config_.flavor == Flavor::m_dependent) {
    if (config_.m < 1) throw std::invalid_argument("m-dependent flavor needs m >= 1");
    window_.resize(static_cast<std::size_t>(config_.m) + 1);
    for (auto& z : window_) z = next_normal();
  }
}

double InnovationStream::next_normal() { return normal_quantile(rng_.uniform_open()); }

double InnovationStream::next() {
  switch (config_.flavor) {
    case Flavor::iid:
      return sample_xi(model_, rng_);
    case Flavor::mds_sign: {
      const double mag = model_.magnitude(rng_.uniform_open());
      const double xi = rng_.fair_sign() * prev_sign_ * mag;
      prev_sign_ = xi < 0.0 ? -1.0 : 1.0;
      return xi;
    }
    case Flavor::m_dependent: {
      double sum = 0.0;
      for (double z : window_) sum += z;
      const double g = sum / std::sqrt(static_cast<double>(window_.size()));
      window_[head_] = next_normal();
      head_ = (head_ + 1) % window_.size();
      // P(|N| > |g|) is uniform on (0,1) because g is standard normal.
      const double u = std::max(std::erfc(std::abs(g) / std::numbers::sqrt2),
                                std::numeric_limits<double>::min());
      const double mag = model_.magnitude(u);
      return g < 0.0 ? -mag : mag;
    }
    case Flavor::degenerate:
      return 1.0;
  }
  return 0.0;
}

void InnovationStream::fill(std::span<double> out) {
  for (auto& v : out) v = next();
}

std::vector<M1Row> check_M1(InnovationStream& stream, std::span<const int> lags,
                            std::span<const std::pair<double, double>> truncations,
                            std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("check_M1: need at least 2 samples");
  int max_lag = 0;
  for (int lag : lags) {
    if (lag < 0) throw std::invalid_argument("check_M1: lags must be >= 0");
    max_lag = std::max(max_lag, lag);
  }
  std::vector<double> xs(samples + static_cast<std::size_t>(max_lag));
  stream.fill(xs);

  const auto& model = stream.model();
  std::vector<M1Row> rows;
  for (const auto& [a, b] : truncations) {
    auto trunc_sq = [](double x, double level) {
      return std::abs(x) <= level ? x * x : 0.0;
    };
    for (int lag : lags) {
      const auto L = static_cast<std::size_t>(lag);
      CompensatedSum sf, sg;
      for (std::size_t k = 0; k < samples; ++k) {
        sf += trunc_sq(xs[k], a);
        sg += trunc_sq(xs[k + L], b);
      }
      const double n = static_cast<double>(samples);
      const double mf = sf.value() / n;
      const double mg = sg.value() / n;
      CompensatedSum sp;
      for (std::size_t k = 0; k < samples; ++k) {
        sp += (trunc_sq(xs[k], a) - mf) * (trunc_sq(xs[k + L], b) - mg);
      }
      const double cov = sp.value() / n;
      CompensatedSum sv;
      for (std::size_t k = 0; k < samples; ++k) {
        const double d = (trunc_sq(xs[k], a) - mf) * (trunc_sq(xs[k + L], b) - mg) - cov;
        sv += d * d;
      }
      const double se = std::sqrt(sv.value() / (n - 1.0) / n);
      double norm = model.h_raw(a) * model.h_raw(b);
      if (!(norm > 0.0)) norm = mf * mg;
      M1Row row;
      row.lag = lag;
      row.a = a;
      row.b = b;
      row.normalized_cov = norm > 0.0 ? cov / norm : 0.0;
      row.std_error = norm > 0.0 ? se / norm : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

double estimate_rho_canonical(InnovationStream& stream, std::size_t samples, int lag) {
  if (lag < 1) throw std::invalid_argument("estimate_rho_canonical: lag must be >= 1");
  if (samples < 100) throw std::invalid_argument("estimate_rho_canonical: too few samples");
  std::vector<double> xs(samples + static_cast<std::size_t>(lag));
  stream.fill(xs);

  std::vector<double> sorted(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(samples));
  std::sort(sorted.begin(), sorted.end());
  constexpr int kThresholds = 16;
  std::vector<double> thresholds;
  for (int i = 1; i <= kThresholds; ++i) {
    const auto idx = static_cast<std::size_t>(static_cast<double>(samples) * i / (kThresholds + 1));
    const double t = sorted[std::min(idx, samples - 1)];
    // Drop thresholds that cannot split the sample (atoms, duplicates).
    if (t >= sorted.back()) continue;
    if (!thresholds.empty() && t <= thresholds.back()) continue;
    thresholds.push_back(t);
  }
  const auto p = static_cast<Eigen::Index>(thresholds.size());
  if (p == 0) return 0.0;

  Eigen::MatrixXd X(static_cast<Eigen::Index>(samples), p);
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(samples), p);
  for (std::size_t k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const double t = thresholds[static_cast<std::size_t>(i)];
      X(static_cast<Eigen::Index>(k), i) = xs[k] <= t ? 1.0 : 0.0;
      Y(static_cast<Eigen::Index>(k), i) = xs[k + static_cast<std::size_t>(lag)] <= t ? 1.0 : 0.0;
    }
  }
  X.rowwise() -= X.colwise().mean();
  Y.rowwise() -= Y.colwise().mean();
  const double scale = 1.0 / static_cast<double>(samples);
  const Eigen::MatrixXd sxx = scale * X.transpose() * X;
  const Eigen::MatrixXd syy = scale * Y.transpose() * Y;
  const Eigen::MatrixXd sxy = scale * X.transpose() * Y;

  const Eigen::LLT<Eigen::MatrixXd> lx(sxx);
  const Eigen::LLT<Eigen::MatrixXd> ly(syy);
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success) return 0.0;
  // Whitened cross-covariance Lx^{-1} Sxy Ly^{-T}; its top singular value is
  // the first canonical correlation.
  const Eigen::MatrixXd left = lx.matrixL().solve(sxy);
  const Eigen::MatrixXd whitened = ly.matrixL().solve(left.transpose()).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened);
  return std::min(1.0, svd.singularValues()(0));
}

}  // namespace heavytail
