#include <doctest.h>

#include <cmath>
#include <random>

#include "bsmvdr/fft.hpp"
#include "test_util.hpp"

using namespace bsmvdr;

namespace {

std::vector<cd> naive_dft(const std::vector<cd>& x, double sign) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, sign * 2.0 * kPi * double((i * k) % n) / double(n));
    out[k] = acc;
  }
  return out;
}

double max_abs_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("fft matches the naive DFT in both directions") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1, 2, 8, 64, 3, 5, 12, 100, 127}) {
    CAPTURE(n);
    FftPlan plan(n);
    auto x = testing::random_vector(n, rng);
    auto fwd = x;
    plan.forward(fwd);
    CHECK(max_abs_diff(fwd, naive_dft(x, -1.0)) < 1e-9 * double(n));
    auto inv = x;
    plan.inverse(inv);
    CHECK(max_abs_diff(inv, naive_dft(x, +1.0)) < 1e-9 * double(n));
  }
}

TEST_CASE("inverse of forward returns n times the input") {
  std::mt19937_64 rng(8);
  for (std::size_t n : {16, 60, 4096}) {
    FftPlan plan(n);
    auto x = testing::random_vector(n, rng);
    auto y = x;
    plan.forward(y);
    plan.inverse(y);
    for (auto& v : y) v /= double(n);
    CHECK(max_abs_diff(x, y) < 1e-12);
  }
}

TEST_CASE("Parseval holds for the unscaled transform") {
  std::mt19937_64 rng(9);
  for (std::size_t n : {32, 24}) {
    FftPlan plan(n);
    auto x = testing::random_vector(n, rng);
    double ex = 0.0;
    for (auto v : x) ex += std::norm(v);
    plan.forward(x);
    double ey = 0.0;
    for (auto v : x) ey += std::norm(v);
    CHECK(ey / double(n) == doctest::Approx(ex).epsilon(1e-12));
  }
}

TEST_CASE("operation counts") {
  for (std::size_t n : {2, 8, 64, 1024}) {
    FftPlan plan(n);
    const auto expected = static_cast<std::uint64_t>(n / 2 * std::log2(double(n)));
    CHECK(plan.mults_per_transform() == expected);
    std::vector<cd> x(n, cd(1.0, 0.0));
    OpCounter c;
    plan.forward(x, &c);
    plan.inverse(x, &c);
    CHECK(c.complex_mults == 2 * expected);
  }
  for (std::size_t n : {3, 100}) {
    FftPlan plan(n);
    std::vector<cd> x(n);
    OpCounter c;
    plan.forward(x, &c);
    CHECK(c.complex_mults == plan.mults_per_transform());
    CHECK(c.complex_mults > 0);
  }
  FftPlan one(1);
  CHECK(one.mults_per_transform() == 0);
}

TEST_CASE("fft errors") {
  CHECK_THROWS_AS(FftPlan(0), DimensionError);
  FftPlan plan(8);
  std::vector<cd> x(7);
  CHECK_THROWS_AS(plan.forward(x), DimensionError);
  CHECK_THROWS_AS(plan.inverse(x), DimensionError);
  CHECK(is_power_of_two(64));
  CHECK_FALSE(is_power_of_two(12));
}
