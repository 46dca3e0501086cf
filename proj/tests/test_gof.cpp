#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "heavytail/gof.hpp"
#include "heavytail/numerics.hpp"
#include "heavytail/rng.hpp"

using namespace heavytail;

namespace {

// sup |F_R - Phi| by counting around every sample point.
double ks_brute(const std::vector<double>& xs) {
  const double r = static_cast<double>(xs.size());
  double d = 0.0;
  for (double x : xs) {
    std::size_t le = 0, lt = 0;
    for (double y : xs) {
      if (y <= x) ++le;
      if (y < x) ++lt;
    }
    const double f = normal_cdf(x);
    d = std::max({d, std::abs(le / r - f), std::abs(lt / r - f)});
  }
  return d;
}

// R * int_0^1 (F_R(Phi^{-1}(u)) - u)^2 du, integrating the step function
// exactly between consecutive probability-integral transforms.
double cvm_brute(const std::vector<double>& xs) {
  const double r = static_cast<double>(xs.size());
  std::vector<double> cuts = {0.0, 1.0};
  for (double x : xs) cuts.push_back(normal_cdf(x));
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= a) continue;
    const double mid = 0.5 * (a + b);
    std::size_t count = 0;
    for (double x : xs) {
      if (normal_cdf(x) <= mid) ++count;
    }
    const double c = count / r;
    total += ((b - c) * (b - c) * (b - c) - (a - c) * (a - c) * (a - c)) / 3.0;
  }
  return r * total;
}

}  // namespace

TEST_CASE("KS and CvM match brute-force references") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + rng() % 100);
    const double shift = (rng.uniform_open() - 0.5) * 2.0;
    for (auto& x : xs) x = normal_quantile(rng.uniform_open()) + shift;
    REQUIRE(ks_normal(xs) == doctest::Approx(ks_brute(xs)).epsilon(1e-12));
    REQUIRE(cvm_normal(xs) == doctest::Approx(cvm_brute(xs)).epsilon(1e-11));
  }
}

TEST_CASE("KS limits and errors") {
  const std::vector<double> far(50, 40.0);
  CHECK(ks_normal(far) == doctest::Approx(1.0));
  CHECK(ks_normal(std::vector<double>{0.0}) == doctest::Approx(0.5));
  CHECK_THROWS_AS((void)ks_normal(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS((void)cvm_normal(std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
  CHECK(ks_critical_95(2000) == doctest::Approx(0.030410524).epsilon(1e-8));
}

TEST_CASE("summary statistics and histogram") {
  const std::vector<double> xs = {4.0, 1.0, 3.0, 2.0, 5.0};
  const auto s = summarize(xs);
  CHECK(s.count == 5);
  CHECK(s.mean == 3.0);
  CHECK(s.variance == 2.5);
  CHECK(s.median == 3.0);
  CHECK(s.q25 == 2.0);
  CHECK(s.q75 == 4.0);
  CHECK(s.iqr() == 2.0);
  CHECK(s.min == 1.0);
  CHECK(s.max == 5.0);
  const auto h = histogram(xs, 4);
  REQUIRE(h.size() == 4);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  CHECK(total == 5);
  CHECK(h.front().lo == 1.0);
  CHECK(h.back().hi == 5.0);
  CHECK(h.back().count == 2);  // 4 and the inclusive top edge 5
  CHECK_THROWS_AS((void)histogram(xs, 0), std::invalid_argument);
}
