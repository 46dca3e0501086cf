#include "heavytail/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "heavytail/numerics.hpp"

namespace heavytail {

double SlowlyVarying::operator()(double x) const noexcept {
  if (log_power == 0.0) return constant;
  return constant * std::pow(1.0 + std::log(x), log_power);
}

double CoefficientSpec::Envelope::operator()(double l) const noexcept {
  double v = scale * std::pow(l, -exponent);
  if (log_power != 0.0) v *= std::pow(1.0 + std::log(l), log_power);
  return v;
}

CoefficientSpec CoefficientSpec::explicit_list(std::vector<double> values,
                                               std::int64_t first_lag) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("explicit coefficients must be finite");
  }
  CoefficientSpec s;
  s.kind_ = Kind::explicit_list;
  s.values_ = std::move(values);
  s.first_lag_ = first_lag;
  return s;
}

CoefficientSpec CoefficientSpec::regvar(double alpha, SlowlyVarying L) {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw std::domain_error("regvar: alpha must lie strictly inside (1/2, 1)");
  }
  if (!(L.constant > 0.0) || !std::isfinite(L.log_power)) {
    throw std::domain_error("regvar: slowly varying factor must be positive");
  }
  CoefficientSpec s;
  s.kind_ = Kind::regvar;
  s.alpha_ = alpha;
  s.L_ = L;
  s.first_lag_ = 1;
  return s;
}

CoefficientSpec CoefficientSpec::fractional(double d) {
  if (!(d > 0.0 && d < 0.5)) {
    throw std::domain_error("fractional: d must lie strictly inside (0, 1/2)");
  }
  CoefficientSpec s;
  s.kind_ = Kind::fractional;
  s.d_ = d;
  s.first_lag_ = 0;
  return s;
}

std::int64_t CoefficientSpec::last_lag() const noexcept {
  if (kind_ != Kind::explicit_list) return std::numeric_limits<std::int64_t>::max();
  return first_lag_ + static_cast<std::int64_t>(values_.size()) - 1;
}

std::vector<double> CoefficientSpec::coefficients(std::size_t count) const {
  std::vector<double> out(count);
  CoefficientStream stream(*this);
  for (auto& v : out) v = stream.next();
  return out;
}

double CoefficientSpec::coefficient(std::int64_t lag) const {
  if (lag < first_lag_) return 0.0;
  switch (kind_) {
    case Kind::explicit_list: {
      const auto k = static_cast<std::size_t>(lag - first_lag_);
      return k < values_.size() ? values_[k] : 0.0;
    }
    case Kind::regvar: {
      const double l = static_cast<double>(lag);
      return std::pow(l, -alpha_) * L_(l);
    }
    case Kind::fractional: {
      double a = 1.0;
      for (std::int64_t i = 1; i <= lag; ++i) {
        a *= (static_cast<double>(i) - 1.0 + d_) / static_cast<double>(i);
      }
      return a;
    }
  }
  return 0.0;
}

CoefficientSpec::Envelope CoefficientSpec::envelope() const {
  switch (kind_) {
    case Kind::regvar: {
      // x^{-alpha}(1 + ln x)^p decreases once alpha (1 + ln x) > p.
      const double from = std::exp(std::max(0.0, L_.log_power / alpha_ - 1.0));
      return {L_.constant, alpha_, L_.log_power, std::max(1.0, from)};
    }
    case Kind::fractional:
      // Gautschi: Gamma(i + d) / Gamma(i + 1) < i^{d - 1}.
      return {1.0 / std::tgamma(d_), 1.0 - d_, 0.0, 1.0};
    case Kind::explicit_list:
      break;
  }
  throw std::logic_error("envelope: explicit coefficient lists have finite support");
}

std::string CoefficientSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::explicit_list:
      os << "explicit(first_lag=" << first_lag_ << ",size=" << values_.size() << ")";
      break;
    case Kind::regvar:
      os << "regvar(alpha=" << alpha_ << ",L=" << L_.constant << "*(1+ln x)^"
         << L_.log_power << ")";
      break;
    case Kind::fractional:
      os << "fractional(d=" << d_ << ")";
      break;
  }
  return os.str();
}

CoefficientStream::CoefficientStream(const CoefficientSpec& spec)
    : spec_(&spec), lag_(spec.first_lag()) {}

double CoefficientStream::next() {
  double v = 0.0;
  switch (spec_->kind()) {
    case CoefficientSpec::Kind::explicit_list: {
      const auto vals = spec_->values();
      v = index_ < vals.size() ? vals[index_] : 0.0;
      break;
    }
    case CoefficientSpec::Kind::regvar: {
      const double l = static_cast<double>(lag_);
      v = std::pow(l, -spec_->alpha()) * spec_->slowly_varying()(l);
      break;
    }
    case CoefficientSpec::Kind::fractional: {
      if (index_ > 0) {
        const double i = static_cast<double>(index_);
        last_ *= (i - 1.0 + spec_->d()) / i;
      }
      v = last_;
      break;
    }
  }
  ++lag_;
  ++index_;
  return v;
}

std::vector<double> fractional_coeffs(double d, std::size_t count) {
  return CoefficientSpec::fractional(d).coefficients(count);
}

double WeightArray::at(std::int64_t j) const noexcept {
  if (j < origin || j > last_index()) return 0.0;
  return entries[static_cast<std::size_t>(j - origin)];
}

double tail_power_for(double exponent) noexcept {
  return std::min(0.1, 0.5 * (2.0 - 1.0 / exponent));
}

namespace {

/// Streams b for s = 0, 1, ... where entry s is the weight of xi at index
/// first_lag - n + s. The visitor returns false to stop.
template <class Visit>
void stream_window(const CoefficientSpec& spec, std::int64_t n, std::int64_t count,
                   Visit&& visit) {
  CoefficientStream coeffs(spec);
  const auto period = static_cast<std::size_t>(n) + 1;
  std::vector<long double> ring(period, 0.0L);
  long double prefix = 0.0L;
  long double comp = 0.0L;
  for (std::int64_t s = 0; s < count; ++s) {
    const long double a = coeffs.next();
    const long double t = prefix + a;
    comp += (std::abs(prefix) >= std::abs(a)) ? (prefix - t) + a : (a - t) + prefix;
    prefix = t;
    const long double p_now = prefix + comp;
    ring[static_cast<std::size_t>(s + 1) % period] = p_now;
    const long double p_low =
        (s + 1 - n >= 0) ? ring[static_cast<std::size_t>(s + 1 - n) % period] : 0.0L;
    if (!visit(s, static_cast<double>(p_now - p_low))) return;
  }
}

WeightArray exact_window(const CoefficientSpec& spec, std::int64_t n) {
  const auto vals = spec.values();
  const auto len = static_cast<std::int64_t>(vals.size());
  WeightArray w;
  w.origin = spec.first_lag() - n;
  if (len == 0) return w;
  std::vector<long double> prefix(vals.size() + 1, 0.0L);
  for (std::size_t i = 0; i < vals.size(); ++i) prefix[i + 1] = prefix[i] + vals[i];
  const std::int64_t width = len + n - 1;
  w.entries.resize(static_cast<std::size_t>(width));
  for (std::int64_t s = 0; s < width; ++s) {
    const std::int64_t hi = std::min(s + 1, len);
    const std::int64_t lo = std::max<std::int64_t>(0, s + 1 - n);
    w.entries[static_cast<std::size_t>(s)] =
        static_cast<double>(prefix[static_cast<std::size_t>(hi)] -
                            prefix[static_cast<std::size_t>(lo)]);
  }
  return w;
}

}  // namespace

WeightArray window_sums(const CoefficientSpec& spec, std::int64_t n, const TailModel& model,
                        WindowOptions opts) {
  if (n < 1) throw std::invalid_argument("window_sums: n must be >= 1");
  if (!(opts.eps_tail > 0.0)) throw std::invalid_argument("window_sums: eps_tail must be > 0");

  std::ostringstream meta;
  meta.precision(17);
  meta << spec.describe() << ";n=" << n;

  if (spec.finite()) {
    WeightArray w = exact_window(spec, n);
    meta << ";window=[" << w.origin << "," << w.last_index() << "];exact";
    w.meta = meta.str();
    return w;
  }

  const auto env = spec.envelope();
  const double q = tail_power_for(env.exponent);
  const double beta = 2.0 - q;
  const double C = model.power_bound(q);
  const std::int64_t origin = spec.first_lag() - n;
  const double n_d = static_cast<double>(n);

  // Bound on sum_{s >= kept} b_s^2 H(1/|b_s|). For those entries every lag in
  // the window is >= x0 + 1, so b_s <= n U(x0) <= 1 and
  // b^2 H(1/b) <= C b^{2-q}.
  auto tail_bound_after = [&](std::int64_t kept) {
    const double x0 = static_cast<double>(origin + kept);
    if (x0 < env.decreasing_from || n_d * env(x0) > 1.0) {
      return std::numeric_limits<double>::infinity();
    }
    return C * std::pow(n_d * env.scale, beta) *
           power_log_tail_integral(x0, env.exponent * beta, env.log_power * beta);
  };

  // Probe: find a checkpoint K where keeping everything already certifies.
  std::int64_t checkpoint =
      static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(std::max<std::int64_t>(n + 1, 1024))));
  std::int64_t K = -1;
  long double kept_b2 = 0.0L;
  double last_bound = std::numeric_limits<double>::infinity();
  stream_window(spec, n, opts.max_window, [&](std::int64_t s, double b) {
    kept_b2 += static_cast<long double>(b) * b;
    const std::int64_t kept = s + 1;
    if (kept == checkpoint || kept == opts.max_window) {
      last_bound = tail_bound_after(kept);
      if (last_bound <= opts.eps_tail * static_cast<double>(kept_b2)) {
        K = kept;
        return false;
      }
      checkpoint *= 2;
    }
    return true;
  });
  if (K < 0) {
    std::ostringstream err;
    err << "window_sums: cannot certify eps_tail=" << opts.eps_tail << " within max_window="
        << opts.max_window << " (omitted-mass ratio bound at the cap: "
        << last_bound / static_cast<double>(kept_b2) << ")";
    throw std::runtime_error(err.str());
  }

  WeightArray w;
  w.origin = origin;
  w.entries.reserve(static_cast<std::size_t>(K));
  stream_window(spec, n, K, [&](std::int64_t, double b) {
    w.entries.push_back(b);
    return true;
  });

  // Smallest J with (sum_{J<=s<K} t_s + bound(K)) <= eps * sum_{s<J} b_s^2.
  // Both sides are monotone in J, so scan down from K.
  const double tail_K = tail_bound_after(K);
  long double total_b2 = 0.0L;
  for (double b : w.entries) total_b2 += static_cast<long double>(b) * b;
  long double suffix_t = 0.0L;
  long double suffix_b2 = 0.0L;
  std::int64_t best = K;
  double best_ratio = tail_K / static_cast<double>(total_b2);
  for (std::int64_t J = K; J >= 1; --J) {
    // Entries s in [J, K) are omitted.
    const long double kept = total_b2 - suffix_b2;
    const long double omitted = suffix_t + tail_K;
    if (omitted > static_cast<long double>(opts.eps_tail) * kept) break;
    best = J;
    best_ratio = static_cast<double>(omitted / kept);
    const double b = w.entries[static_cast<std::size_t>(J - 1)];
    suffix_t += condition_term(b, model);
    suffix_b2 += static_cast<long double>(b) * b;
  }
  w.entries.resize(static_cast<std::size_t>(best));
  w.entries.shrink_to_fit();
  w.truncation_tail_bound = best_ratio;
  meta << ";window=[" << w.origin << "," << w.last_index() << "];eps_tail=" << opts.eps_tail
       << ";tail_bound=" << best_ratio;
  w.meta = meta.str();
  return w;
}

double causal_window_sum(const CoefficientSpec& spec, std::int64_t n, std::int64_t i) {
  const std::int64_t lo = std::max(spec.first_lag(), i - n + 1);
  if (i < lo) return 0.0;
  const auto count = static_cast<std::size_t>(i - spec.first_lag() + 1);
  const auto coeffs = spec.coefficients(count);
  CompensatedSum acc;
  for (std::int64_t l = lo; l <= i; ++l) {
    acc += coeffs[static_cast<std::size_t>(l - spec.first_lag())];
  }
  return acc.value();
}

Coeff0Check check_coeff0(const CoefficientSpec& spec, const TailModel& model,
                         std::int64_t terms) {
  Coeff0Check out;
  CompensatedSum acc;
  if (spec.finite()) {
    for (double a : spec.values()) acc += condition_term(a, model);
    out.partial = acc.value();
    out.tail_bound = 0.0;
    out.converges = std::isfinite(out.partial);
    return out;
  }
  if (terms < 1) throw std::invalid_argument("check_coeff0: terms must be >= 1");
  CoefficientStream stream(spec);
  for (std::int64_t k = 0; k < terms; ++k) acc += condition_term(stream.next(), model);
  out.partial = acc.value();

  const auto env = spec.envelope();
  const double q = tail_power_for(env.exponent);
  const double beta = 2.0 - q;
  const double x0 = static_cast<double>(spec.first_lag() + terms - 1);
  if (x0 < 1.0 || x0 < env.decreasing_from || env(x0) > 1.0) {
    out.tail_bound = std::numeric_limits<double>::infinity();
    out.converges = false;
    return out;
  }
  out.tail_bound = model.power_bound(q) * std::pow(env.scale, beta) *
                   power_log_tail_integral(x0, env.exponent * beta, env.log_power * beta);
  out.converges = std::isfinite(out.tail_bound);
  return out;
}

GenCheck check_gen(std::span<const double> weights, const TailModel& model) {
  GenCheck out;
  CompensatedSum acc;
  for (double c : weights) {
    const double t = condition_term(c, model);
    acc += t;
    out.max_cond = std::max(out.max_cond, t);
  }
  out.sum_cond = acc.value();
  return out;
}

double check_coeffD(std::span<const double> weights, const TailModel& model, double D) {
  if (!(D >= 1.0)) throw std::invalid_argument("check_coeffD: D must be >= 1");
  double worst = 0.0;
  for (double c : weights) {
    if (c == 0.0) continue;
    const double r = c / D;
    worst = std::max(worst, r * r * model.H(D / std::abs(c)));
  }
  return worst;
}

}  // namespace heavytail
