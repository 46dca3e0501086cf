#include "heavytail/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heavytail/normalizer.hpp"
#include "heavytail/numerics.hpp"

namespace heavytail {

namespace {

struct Accumulators {
  CompensatedSum s;
  CompensatedSum v2;

  void add(double c, double xi) {
    const double t = c * xi;
    s += t;
    v2 += t * t;
  }
};

PathStatistics finish(const Accumulators& acc, std::int64_t n, std::optional<double> D,
                      const std::string& meta) {
  PathStatistics out;
  out.S = acc.s.value();
  out.V_raikov = std::sqrt(std::max(0.0, acc.v2.value()));
  out.n = n;
  out.weights_meta = meta;
  if (out.V_raikov > 0.0) out.T_self = out.S / out.V_raikov;
  if (D) {
    if (!(*D > 0.0)) throw std::invalid_argument("normalizer D must be positive");
    out.T_D = out.S / *D;
    const double r = out.V_raikov / *D;
    out.ratio_LLN = r * r;
  }
  return out;
}

}  // namespace

PathStatistics weighted_sum(const WeightArray& weights, InnovationStream& stream,
                            std::optional<double> D) {
  if (weights.entries.empty()) throw std::invalid_argument("weighted_sum: empty weight array");
  Accumulators acc;
  for (double c : weights.entries) acc.add(c, stream.next());
  return finish(acc, static_cast<std::int64_t>(weights.size()), D, weights.meta);
}

PathStatistics weighted_sum(const WeightArray& weights, std::span<const double> innovations,
                            std::optional<double> D) {
  if (weights.entries.empty()) throw std::invalid_argument("weighted_sum: empty weight array");
  if (innovations.size() != weights.size()) {
    throw std::invalid_argument("weighted_sum: innovation count must match the weights");
  }
  Accumulators acc;
  for (std::size_t k = 0; k < innovations.size(); ++k) acc.add(weights.entries[k], innovations[k]);
  return finish(acc, static_cast<std::int64_t>(weights.size()), D, weights.meta);
}

LinearProcessPlan::LinearProcessPlan(const CoefficientSpec& spec, std::int64_t n,
                                     const TailModel& model, WindowOptions opts,
                                     std::optional<ConvolutionMethod> method)
    : spec_(spec),
      n_(n),
      window_(window_sums(spec, n, model, opts)),
      corr_([&] {
        const std::int64_t first = spec.first_lag();
        if (window_.origin != first - n) {
          throw std::logic_error("LinearProcessPlan: unexpected window origin");
        }
        std::int64_t last = window_.last_index() + n;
        if (spec.finite()) last = std::min(last, spec.last_lag());
        const auto len = static_cast<std::size_t>(last - first + 1);
        const auto out_len = static_cast<std::size_t>(n);
        return CrossCorrelator(spec.coefficients(len), out_len,
                               method.value_or(CrossCorrelator::choose(out_len, len)));
      }()) {}

std::vector<double> LinearProcessPlan::path(std::span<const double> innovations) const {
  if (innovations.size() != window_.size()) {
    throw std::invalid_argument("LinearProcessPlan::path: innovation count must match window");
  }
  // out[k'] = X_{n - k'}
  std::vector<double> out(static_cast<std::size_t>(n_));
  corr_.apply(innovations, out);
  std::reverse(out.begin(), out.end());
  return out;
}

PathStatistics linear_process_path(const LinearProcessPlan& plan, InnovationStream& stream,
                                   std::optional<double> D) {
  std::vector<double> z(plan.window().size());
  stream.fill(z);
  return linear_process_path(plan, z, D);
}

PathStatistics linear_process_path(const LinearProcessPlan& plan, std::span<const double> z,
                                   std::optional<double> D) {
  const WeightArray& w = plan.window();
  if (z.size() != w.size()) {
    throw std::invalid_argument("linear_process_path: innovation count must match the window");
  }
  Accumulators acc;
  for (std::size_t k = 0; k < z.size(); ++k) acc.add(w.entries[k], z[k]);
  PathStatistics out = finish(acc, plan.n(), D, w.meta);

  const std::vector<double> x = plan.path(z);
  CompensatedSum sp;
  CompensatedSum vp;
  for (double v : x) {
    sp += v;
    vp += v * v;
  }
  out.V_path = std::sqrt(std::max(0.0, vp.value()));
  const double scale = std::max({std::abs(out.S), out.V_raikov, std::numeric_limits<double>::min()});
  out.representation_gap = std::abs(sp.value() - out.S) / scale;
  if (!(out.representation_gap <= LinearProcessPlan::kGapTolerance)) {
    throw std::runtime_error("linear_process_path: path and window forms disagree (gap " +
                             std::to_string(out.representation_gap) + ")");
  }
  return out;
}

PathStatistics linear_process_path(const CoefficientSpec& spec, std::int64_t n,
                                   InnovationStream& stream, WindowOptions opts,
                                   std::optional<double> D) {
  const LinearProcessPlan plan(spec, n, stream.model(), opts);
  return linear_process_path(plan, stream, D);
}

double kulik_target_variance(const CoefficientSpec& spec) {
  if (!spec.finite()) {
    throw std::domain_error("kulik_statistic: coefficients not absolutely summable");
  }
  CompensatedSum s;
  CompensatedSum s2;
  for (double a : spec.values()) {
    s += a;
    s2 += a * a;
  }
  if (!(s2.value() > 0.0)) throw std::invalid_argument("kulik_statistic: all-zero coefficients");
  return s.value() * s.value() / s2.value();
}

KulikResult kulik_statistic(const PathStatistics& path, const CoefficientSpec& spec) {
  const double target = kulik_target_variance(spec);
  if (!(path.V_path > 0.0)) throw std::invalid_argument("kulik_statistic: V_path must be positive");
  return {path.S / path.V_path, target};
}

double coefficient_square_sum(const CoefficientSpec& spec) {
  switch (spec.kind()) {
    case CoefficientSpec::Kind::explicit_list: {
      CompensatedSum s;
      for (double a : spec.values()) s += a * a;
      return s.value();
    }
    case CoefficientSpec::Kind::fractional: {
      const double d = spec.d();
      const double g = std::tgamma(1.0 - d);
      return std::tgamma(1.0 - 2.0 * d) / (g * g);
    }
    case CoefficientSpec::Kind::regvar:
      break;
  }
  const double alpha = spec.alpha();
  const SlowlyVarying& L = spec.slowly_varying();
  auto f = [&](double x) {
    const double l = L(x);
    return std::pow(x, -2.0 * alpha) * l * l;
  };
  constexpr std::int64_t kTerms = 100'000;
  CompensatedSum head;
  for (std::int64_t i = 1; i <= kTerms; ++i) head += f(static_cast<double>(i));

  // Tail sum_{i > M} f(i) = int_M^inf f - f(M)/2 - f'(M)/12 + O(f'''(M)).
  const double M = static_cast<double>(kTerms);
  const double u0 = std::log(M);
  const double span = 60.0 / (2.0 * alpha - 1.0);
  auto g = [&](double u) {
    const double l = L(std::exp(u));
    return std::exp((1.0 - 2.0 * alpha) * u) * l * l;
  };
  const double integral = integrate_adaptive(g, u0, u0 + span, 1e-14 * g(u0)).value;
  const double fM = f(M);
  const double dfM = fM * (-2.0 * alpha + 2.0 * L.log_power / (1.0 + u0)) / M;
  return head.value() + integral - fM / 2.0 - dfM / 12.0;
}

PeligradSangConstants PeligradSangConstants::compute(const CoefficientSpec& spec, std::int64_t n) {
  if (spec.kind() != CoefficientSpec::Kind::regvar) {
    throw std::invalid_argument("peligrad_sang_ratio: needs a causal regvar spec");
  }
  if (n < 1) throw std::invalid_argument("peligrad_sang_ratio: n must be >= 1");
  PeligradSangConstants k;
  k.A2 = coefficient_square_sum(spec);
  k.c_alpha = calpha(spec.alpha());
  k.a_n = spec.coefficient(n);
  k.n = n;
  return k;
}

double peligrad_sang_ratio(const PathStatistics& path, const PeligradSangConstants& k) {
  if (!(path.V_path > 0.0)) {
    throw std::invalid_argument("peligrad_sang_ratio: V_path must be positive");
  }
  const double nd = static_cast<double>(k.n);
  const double num = k.A2 * path.V_raikov * path.V_raikov;
  const double den = k.c_alpha * nd * nd * k.a_n * k.a_n * path.V_path * path.V_path;
  return num / den;
}

double peligrad_sang_ratio(const PathStatistics& path, const CoefficientSpec& spec,
                           std::int64_t n) {
  return peligrad_sang_ratio(path, PeligradSangConstants::compute(spec, n));
}

}  // namespace heavytail
