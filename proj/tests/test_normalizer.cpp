#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "heavytail/normalizer.hpp"
#include "heavytail/rng.hpp"

using namespace heavytail;

TEST_CASE("D_n for equal weights") {
  const std::vector<double> w100(100, 1.0);
  const auto c = solve_Dn(w100, TailModel::constant());
  CHECK(c.D == 10.0);
  const auto p = solve_Dn(w100, TailModel::pareto2());
  CHECK(std::abs(p.D - 25.4416491690181) < 1e-6);
  CHECK(p.residual <= 0.0);
  CHECK(p.lower_bound_check);
  CHECK(p.method == NormalizerMethod::root_find);
  const std::vector<double> w(10000, 1.0);
  CHECK(solve_Dn(w, TailModel::pareto2()).D == doctest::Approx(341.571581554531).epsilon(1e-8));
  CHECK(solve_Dn(w100, TailModel::logpareto()).D == doctest::Approx(57.2357501507314).epsilon(1e-8));
}

TEST_CASE("D_n is the first crossing and scales with the weights") {
  Rng rng(5);
  const auto m = TailModel::pareto2();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(1 + rng() % 500);
    for (auto& x : w) x = (rng.uniform_open() - 0.3) * 10.0;
    const auto rep = solve_Dn(w, m);
    const double D = rep.D;
    CHECK(condition_sum_direct(w, m, D) <= 1.0 + 1e-12);
    if (D > 1.0 + 1e-6) CHECK(condition_sum_direct(w, m, D * (1.0 - 1e-7)) > 1.0);
    double ss = 0.0;
    for (double x : w) ss += x * x;
    CHECK(D * D >= ss * (1.0 - 1e-12));
  }
  const std::vector<double> zeros(5, 0.0);
  CHECK_THROWS_AS((void)solve_Dn(zeros, m), std::invalid_argument);
  // Convention 1: zero weights change nothing.
  std::vector<double> a = {1.0, 2.0, 3.0};
  std::vector<double> b = {1.0, 0.0, 2.0, 0.0, 3.0};
  CHECK(solve_Dn(a, m).D == solve_Dn(b, m).D);
}

TEST_CASE("fast condition sum equals the term-by-term sum") {
  Rng rng(17);
  for (const auto& m : {TailModel::pareto2(), TailModel::logpareto(), TailModel::constant()}) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> w(1 + rng() % 300);
      for (auto& x : w) x = std::ldexp(rng.uniform_open() - 0.5, static_cast<int>(rng() % 20) - 5);
      const ConditionSum g(w, m);
      for (double s : {1.0, 2.5, 17.0, 1e3, 1e6}) {
        REQUIRE(g(s) == doctest::Approx(condition_sum_direct(w, m, s)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("c_alpha against high-precision oracles") {
  CHECK(calpha(0.75) == doctest::Approx(13.984306956224639).epsilon(1e-11));
  CHECK(calpha(0.6) == doctest::Approx(9.4973408513054416).epsilon(1e-11));
  CHECK(calpha(0.9) == doctest::Approx(86.371661196717785).epsilon(1e-11));
  CHECK_THROWS_AS((void)calpha(0.5), std::domain_error);
  CHECK_THROWS_AS((void)calpha(1.0), std::domain_error);
}

TEST_CASE("c_alpha against an independent Simpson evaluation") {
  // x = 1 + t^4 removes the endpoint singularity; the tail beyond X uses
  // v = x^{-1} with the integrand expanded to leading order plus a correction.
  for (double alpha : {0.55, 0.7, 0.85}) {
    const double beta = 1.0 - alpha;
    auto g = [beta](double x) {
      const double d = std::pow(x, beta) - std::pow(x - 1.0, beta);
      return d * d;
    };
    const double X = 2e4;
    const double T = std::pow(X - 1.0, 0.25);
    const int N = 400000;
    double s = 0.0;
    for (int i = 0; i <= N; ++i) {
      const double t = T * i / N;
      const double w = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * g(1.0 + t * t * t * t) * 4.0 * t * t * t;
    }
    const double mid = s * (T / N) / 3.0;
    // Tail: (x^b - (x-1)^b)^2 = b^2 x^{2b-2} (1 + (1-b)/x + ...)
    const double p = 2.0 * beta - 1.0;
    const double tail = beta * beta * (std::pow(X, p) / (-p) + (1.0 - beta) * std::pow(X, p - 1.0) / (1.0 - p));
    const double oracle = (1.0 / (3.0 - 2.0 * alpha) + mid + tail) / (beta * beta);
    CHECK(calpha(alpha) == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("asymptotic D_n tracks the root-find value") {
  const auto m = TailModel::pareto2();
  const auto spec = CoefficientSpec::regvar(0.75);
  const std::int64_t n = 10000;
  const auto w = window_sums(spec, n, m, {0.05, 100'000'000});
  const double D = solve_Dn(w.entries, m).D;
  const double A = asymptotic_Dn_regvar(0.75, {}, n, m);
  CHECK(A / D == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("B_n estimate") {
  const std::vector<double> s = {1.0, -1.0, 3.0, -3.0};
  const auto b = estimate_Bn(s);
  CHECK(b.value == doctest::Approx(2.0 * std::sqrt(std::numbers::pi / 2.0)));
  CHECK(b.std_error > 0.0);
  CHECK_THROWS_AS((void)estimate_Bn(std::vector<double>{}), std::invalid_argument);
}
