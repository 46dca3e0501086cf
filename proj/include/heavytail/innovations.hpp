#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heavytail/rng.hpp"
#include "heavytail/tail_model.hpp"

namespace heavytail {

/// Dependence class of an innovation sequence. All flavors share the
/// model's symmetric marginal except `degenerate`, the constant stream
/// xi == 1 kept for scorer diagnostics.
enum class Flavor { iid, mds_sign, m_dependent, degenerate };

[[nodiscard]] std::string_view to_string(Flavor f) noexcept;
/// Throws std::invalid_argument on unknown names.
[[nodiscard]] Flavor flavor_from_string(std::string_view name);

struct InnovationConfig {
  Flavor flavor = Flavor::iid;
  int m = 2;  // window for m_dependent
};

/// Seeded innovation generator. (seed, stream_id, k) determines xi_k.
///
/// - iid: sign * magnitude(U), independent across k.
/// - mds_sign: xi_k = R_k sigma_k |V_k| where sigma_k is the sign of
///   xi_{k-1} and R_k an independent fair sign. E[xi_k | past] = 0 and
///   xi_k^2 is i.i.d.
/// - m_dependent: G_k = (N_k + ... + N_{k+m}) / sqrt(m+1) for i.i.d. standard
///   normals N; xi_k = sign(G_k) magnitude(P(|N| > |G_k|)). The marginal is
///   exactly the model's law and xi_k, xi_l are independent for |k-l| > m.
///
/// Single-owner: not safe to share across threads.
class InnovationStream {
 public:
  InnovationStream(TailModel model, InnovationConfig config, std::uint64_t seed,
                   std::uint64_t stream_id);

  double next();
  void fill(std::span<double> out);

  [[nodiscard]] const TailModel& model() const noexcept { return model_; }
  [[nodiscard]] const InnovationConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  double next_normal();

  TailModel model_;
  InnovationConfig config_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  Rng rng_;
  double prev_sign_ = 1.0;
  std::vector<double> window_;  // ring of m+1 normals
  std::size_t head_ = 0;
};

struct M1Row {
  int lag = 0;
  double a = 0.0;
  double b = 0.0;
  /// cov(xi_j^2 1{|xi_j|<=a}, xi_{j+lag}^2 1{|xi_{j+lag}|<=b}) / (E[.] E[.])
  double normalized_cov = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimates of the truncated-square covariances in (M1) from
/// `samples` consecutive draws of the stream. Lag 0 rows are the variance of
/// the truncated square and are reported for reference only.
[[nodiscard]] std::vector<M1Row> check_M1(InnovationStream& stream, std::span<const int> lags,
                                          std::span<const std::pair<double, double>> truncations,
                                          std::size_t samples);

/// Largest canonical correlation between the indicator vectors
/// (1{xi_k <= t_i})_i and (1{xi_{k+lag} <= t_i})_i over 16 empirical-quantile
/// thresholds. Estimates rho(lag) from below.
[[nodiscard]] double estimate_rho_canonical(InnovationStream& stream, std::size_t samples,
                                            int lag = 1);

}  // namespace heavytail
