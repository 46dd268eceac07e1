#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bsmvdr/beamspace.hpp"
#include "test_util.hpp"

using namespace bsmvdr;

namespace {

double captured_fraction(const SteeringVector& a, const BeamspaceTransform& t, const WindowSpec& w) {
  return windowed_steering(a, t, w).squaredNorm() / t.forward(a).squaredNorm();
}

}  // namespace

TEST_CASE("transform matches the dense Kronecker matrix") {
  std::mt19937_64 rng(4);
  struct Case { int n_z, n_x, m_z, m_x; };
  for (auto c : {Case{4, 32, 4, 32}, Case{4, 32, 8, 64}, Case{3, 5, 8, 12}, Case{2, 3, 2, 3}}) {
    CAPTURE(c.m_z);
    CAPTURE(c.m_x);
    auto geom = ArrayGeometry::half_wavelength(c.n_z, c.n_x, 10e9);
    BeamspaceTransform t(geom, {c.m_z, c.m_x});
    auto d = testing::dense_beamspace(c.n_z, c.n_x, c.m_z, c.m_x);
    for (int trial = 0; trial < 5; ++trial) {
      auto y = testing::random_eigen(geom.size(), rng);
      CHECK((t.forward(y) - d * y).cwiseAbs().maxCoeff() < 1e-10);
      auto beam = testing::random_eigen(t.bins(), rng);
      CHECK((t.adjoint(beam) - d.adjoint() * beam).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("zero input and unitarity without padding") {
  std::mt19937_64 rng(5);
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspaceTransform t(geom, {4, 32});
  CHECK(t.forward(Eigen::VectorXcd::Zero(128)).norm() == 0.0);
  for (int i = 0; i < 10; ++i) {
    auto y = testing::random_eigen(128, rng);
    CHECK(t.forward(y).norm() == doctest::Approx(y.norm()).epsilon(1e-12));
    CHECK((t.adjoint(t.forward(y)) - y).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Padded: the truncated DFT keeps orthonormal columns, D^H D = I.
  BeamspaceTransform p(geom, {8, 64});
  for (int i = 0; i < 3; ++i) {
    auto y = testing::random_eigen(128, rng);
    CHECK((p.adjoint(p.forward(y)) - y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.forward(y).norm() == doctest::Approx(y.norm()).epsilon(1e-12));
  }
}

TEST_CASE("on-grid steering vector maps to a single bin") {
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspacePlan plan{4, 32};
  BeamspaceTransform t(geom, plan);
  for (int r = 0; r < 4; ++r) {
    for (int col : {0, 5, 31}) {
      const SpatialFrequencies sf{2 * kPi * col / 32, 2 * kPi * r / 4};
      auto beam = t.forward(steering_vector(sf, geom));
      const int bin = col * 4 + r;
      CHECK(std::abs(beam(bin)) == doctest::Approx(std::sqrt(128.0)).epsilon(1e-12));
      beam(bin) = 0.0;
      CHECK(beam.cwiseAbs().maxCoeff() < 1e-10);
      auto [row_c, col_c] = window_center(sf, plan);
      CHECK(row_c == r);
      CHECK(col_c == col);
    }
  }
}

TEST_CASE("window center rounding") {
  BeamspacePlan plan{8, 64};
  CHECK(window_center({0.0, 0.0}, plan) == std::pair{0, 0});
  CHECK(window_center({0.0, 2 * kPi * 3 / 8}, plan).first == 3);
  CHECK(window_center({0.0, -2 * kPi / 8}, plan).first == 7);
  CHECK(window_center({-2 * kPi * 2 / 64, 0.0}, plan).second == 62);

  // Half-way between bins 3 and 4 rounds to the even bin; both choices
  // capture the same energy.
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspaceTransform t(geom, {8, 64});
  const SpatialFrequencies sf{0.0, 2 * kPi * 3.5 / 8};
  CHECK(window_center(sf, plan).first == 4);
  auto a = steering_vector(sf, geom);
  auto beam = t.forward(a);
  CHECK(std::abs(beam(3)) == doctest::Approx(std::abs(beam(4))).epsilon(1e-12));
}

TEST_CASE("window indices wrap circularly") {
  BeamspacePlan plan{8, 16};
  auto idx = window_indices(plan, {3, 1, 0, 0});
  CHECK(idx == std::vector<int>{7, 0, 1});
  idx = window_indices(plan, {1, 3, 0, 0});
  CHECK(idx == std::vector<int>{15 * 8, 0, 8});
  // Even windows: floor(w/2) below the center, the rest above.
  idx = window_indices(plan, {2, 4, 5, 10});
  REQUIRE(idx.size() == 8);
  CHECK(idx[0] == 8 * 8 + 4);
  CHECK(idx[1] == 8 * 8 + 5);
  CHECK(idx[7] == 11 * 8 + 5);

  CHECK_THROWS_AS(WindowSpec({9, 1, 0, 0}).validate(plan), ConfigError);
  CHECK_THROWS_AS(WindowSpec({0, 1, 0, 0}).validate(plan), ConfigError);
  CHECK_THROWS_AS(WindowSpec({2, 2, 8, 0}).validate(plan), ConfigError);
  CHECK_THROWS_AS(BeamspacePlan({2, 32}).validate(ArrayGeometry::half_wavelength(4, 32, 10e9)),
                  ConfigError);
}

TEST_CASE("extract window") {
  std::mt19937_64 rng(6);
  BeamspacePlan plan{4, 8};
  auto beam = testing::random_eigen(32, rng);
  auto full = extract_window(beam, plan, {4, 8, 1, 3});
  CHECK(full.norm() == doctest::Approx(beam.norm()).epsilon(1e-14));
  std::vector<double> sorted_in(32), sorted_out(32);
  for (int i = 0; i < 32; ++i) {
    sorted_in[i] = std::abs(beam(i));
    sorted_out[i] = std::abs(full(i));
  }
  std::sort(sorted_in.begin(), sorted_in.end());
  std::sort(sorted_out.begin(), sorted_out.end());
  CHECK(sorted_in == sorted_out);

  WindowSpec w{2, 3, 3, 7};
  auto idx = window_indices(plan, w);
  auto out = extract_window(beam, plan, w);
  for (int i = 0; i < w.size(); ++i) CHECK(out(i) == beam(idx[i]));
  CHECK_THROWS_AS(extract_window(Eigen::VectorXcd(Eigen::VectorXcd::Zero(31)), plan, w), DimensionError);
}

TEST_CASE("windowed steering and energy capture") {
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspacePlan plan{4, 32};
  BeamspaceTransform t(geom, plan);

  auto bore = steering_vector({0.0, 0.0}, geom);
  WindowSpec w{2, 4, 0, 0};
  auto at = windowed_steering(bore, t, w);
  auto idx = window_indices(plan, w);
  const int pos = static_cast<int>(std::find(idx.begin(), idx.end(), 0) - idx.begin());
  REQUIRE(pos < w.size());
  CHECK(std::abs(at(pos)) == doctest::Approx(std::sqrt(128.0)));
  at(pos) = 0.0;
  CHECK(at.norm() < 1e-10);
  CHECK(captured_fraction(bore, t, w) == doctest::Approx(1.0));

  // Full window without padding is a unitary rotation.
  const SpatialFrequencies off{0.37, -1.1};
  auto a = steering_vector(off, geom);
  CHECK(windowed_steering(a, t, {4, 32, 0, 0}).norm() == doctest::Approx(a.norm()).epsilon(1e-10));

  // Half-bin offset on the vertical axis, 2x4 window.
  const SpatialFrequencies half{0.0, 2 * kPi * 1.5 / 4};
  auto c = window_center(half, plan);
  auto ah = steering_vector(half, geom);
  CHECK(captured_fraction(ah, t, {2, 4, c.first, c.second}) >= 0.8);

  // Off-grid: window never gains energy; capture grows with the window.
  auto co = window_center(off, plan);
  double prev = 0.0;
  for (auto [wz, wx] : {std::pair{1, 1}, {1, 2}, {2, 2}, {2, 4}, {3, 4}, {4, 8}, {4, 32}}) {
    auto v = windowed_steering(a, t, {wz, wx, co.first, co.second});
    CHECK(v.norm() <= a.norm() * (1 + 1e-12));
    const double frac = v.squaredNorm() / a.squaredNorm();
    CHECK(frac >= prev - 1e-12);
    prev = frac;
  }
  CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("transform counts and errors") {
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspaceTransform t(geom, {8, 64});
  OpCounter c;
  t.forward(Eigen::VectorXcd(Eigen::VectorXcd::Ones(128)), &c);
  CHECK(c.complex_mults == t.mults_per_transform());
  CHECK(c.complex_mults > 0);
  CHECK_THROWS_AS(t.forward(Eigen::VectorXcd(Eigen::VectorXcd::Ones(64))), DimensionError);
  CHECK_THROWS_AS(t.adjoint(Eigen::VectorXcd(Eigen::VectorXcd::Ones(128))), DimensionError);
}
