#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bsmvdr/mvdr.hpp"
#include "test_util.hpp"

using namespace bsmvdr;

namespace {

/// Snapshots of one interferer plus white noise.
Eigen::MatrixXcd interference_snapshots(const Eigen::VectorXcd& b, double power, int n_t,
                                        std::mt19937_64& rng) {
  Eigen::MatrixXcd y = testing::random_matrix(static_cast<int>(b.size()), n_t, rng) / std::sqrt(2.0);
  for (int n = 0; n < n_t; ++n) y.col(n) += std::sqrt(power / 2.0) * testing::random_cd(rng) * b;
  return y;
}

/// Random w with w^H a = 1.
Eigen::VectorXcd random_constrained(const Eigen::VectorXcd& a, std::mt19937_64& rng) {
  Eigen::VectorXcd w = testing::random_eigen(static_cast<int>(a.size()), rng);
  const cd g = w.dot(a);  // w^H a
  return w / std::conj(g);
}

}  // namespace

TEST_CASE("covariance of fixed snapshots") {
  Eigen::VectorXcd y(3);
  y << cd(1, 2), cd(-0.5, 0), cd(0, 3);
  auto r1 = estimate_covariance(Eigen::MatrixXcd(y), 0.0);
  CHECK(r1.n_t == 1);
  CHECK((r1.matrix - y * y.adjoint()).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXcd two(2, 2);
  two << cd(1, 0), cd(0, 1), cd(2, -1), cd(1, 1);
  auto r2 = estimate_covariance(two, 0.0);
  Eigen::MatrixXcd hand(2, 2);
  // 0.5 * (y0 y0^H + y1 y1^H), y0 = (1, 2-j), y1 = (j, 1+j).
  hand(0, 0) = 0.5 * (1.0 + 1.0);
  hand(1, 1) = 0.5 * (5.0 + 2.0);
  hand(1, 0) = 0.5 * (cd(2, -1) * 1.0 + cd(1, 1) * std::conj(cd(0, 1)));
  hand(0, 1) = std::conj(hand(1, 0));
  CHECK((r2.matrix - hand).cwiseAbs().maxCoeff() < 1e-15);

  auto loaded = estimate_covariance(two, 0.1);
  const double delta = 0.1 * hand.trace().real() / 2.0;
  CHECK(loaded.loading == doctest::Approx(delta));
  CHECK((loaded.matrix - hand - delta * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(estimate_covariance(Eigen::MatrixXcd(3, 0), 0.0), DimensionError);
  CHECK_THROWS_AS(estimate_covariance(two, -1.0), ConfigError);
}

TEST_CASE("white-noise covariance tends to identity") {
  std::mt19937_64 rng(10);
  const int dim = 8, n_t = 4000;
  Eigen::MatrixXcd y = testing::random_matrix(dim, n_t, rng) / std::sqrt(2.0);
  OpCounter c;
  auto r = estimate_covariance(y, 1e-3, &c);
  CHECK(c.complex_mults == std::uint64_t(n_t) * dim * (dim + 1) / 2);
  CHECK(r.matrix == r.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.matrix);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  const Eigen::MatrixXcd unloaded = r.matrix - r.loading * Eigen::MatrixXcd::Identity(dim, dim);
  CHECK((unloaded - Eigen::MatrixXcd::Identity(dim, dim)).norm() < 5.0 * dim / std::sqrt(double(n_t)));
}

TEST_CASE("Hermitian factorization") {
  std::mt19937_64 rng(11);
  const int n = 12;
  Eigen::MatrixXcd a = testing::random_matrix(n, 3 * n, rng);
  Eigen::MatrixXcd r = a * a.adjoint() / double(3 * n);
  auto f = HermitianFactor::factor(r);
  CHECK(f.dim() == n);
  CHECK(f.min_pivot() > 0.0);
  auto b = testing::random_eigen(n, rng);
  Eigen::VectorXcd ref = r.llt().solve(b);
  CHECK((f.solve(b) - ref).norm() < 1e-10 * ref.norm());
  CHECK_THROWS_AS(f.solve(Eigen::VectorXcd(Eigen::VectorXcd::Ones(n - 1))), DimensionError);

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(3, 3);
  bad(2, 2) = -1.0;
  try {
    HermitianFactor::factor(bad);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.pivot_index() == 2);
    CHECK(e.pivot_value() == doctest::Approx(-1.0));
  }
  CHECK_THROWS_AS(HermitianFactor::factor(Eigen::MatrixXcd(2, 3)), DimensionError);
}

TEST_CASE("MVDR closed-form examples") {
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  auto bore = steering_vector({0.0, 0.0}, geom);
  CovarianceEstimate white{2.5 * Eigen::MatrixXcd::Identity(128, 128), 1, 0.0};
  auto c = mvdr_correlator(white, bore);
  CHECK((c.weights - Eigen::VectorXcd::Constant(128, 1.0 / 128)).cwiseAbs().maxCoeff() < 1e-14);

  auto g = ArrayGeometry::half_wavelength(2, 4, 10e9);
  auto a = steering_vector({0.0, 0.0}, g);
  // b orthogonal to a: alternating signs along x.
  auto b = steering_vector({kPi, 0.0}, g);
  REQUIRE(std::abs(b.dot(a)) < 1e-12);
  CovarianceEstimate rb{Eigen::MatrixXcd::Identity(8, 8) + 50.0 * b * b.adjoint(), 1, 0.0};
  auto cb = mvdr_correlator(rb, a);
  CHECK((cb.weights - a / a.squaredNorm()).cwiseAbs().maxCoeff() < 1e-12);

  auto bi = steering_vector({0.6, 0.3}, g);
  CovarianceEstimate ri{Eigen::MatrixXcd::Identity(8, 8) + 100.0 * bi * bi.adjoint(), 1, 0.0};
  auto ci = mvdr_correlator(ri, a);
  CHECK(std::abs(ci.weights.dot(bi)) / (ci.weights.norm() * bi.norm()) < 0.05);
  CHECK(std::abs(ci.weights.dot(a) - 1.0) < 1e-9);

  CHECK_THROWS_AS(mvdr_correlator(ri, bore), DimensionError);
}

TEST_CASE("distortionless constraint and optimality on small problems") {
  std::mt19937_64 rng(12);
  for (int dim = 1; dim <= 4; ++dim) {
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::MatrixXcd y = testing::random_matrix(dim, 3 * dim + 2, rng);
      auto R = estimate_covariance(y, 1e-3);
      auto a = testing::random_eigen(dim, rng);
      auto c = mvdr_correlator(R, a);
      CHECK(std::abs(c.weights.dot(a) - 1.0) < 1e-9);
      const double p_opt = output_power(c.weights, R.matrix);
      for (int t = 0; t < 2000; ++t) {
        auto w = random_constrained(a, rng);
        CHECK(p_opt <= output_power(w, R.matrix) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("reduced MVDR") {
  std::mt19937_64 rng(13);
  Eigen::VectorXcd at(1);
  at << cd(0.4, -1.5);
  CovarianceEstimate r1{Eigen::MatrixXcd::Constant(1, 1, 3.0), 1, 0.0};
  auto c1 = reduced_mvdr(r1, at);
  CHECK(c1.space == CorrelatorSpace::WindowedBeamspace);
  CHECK(std::abs(c1.weights(0) - at(0) / std::norm(at(0))) < 1e-15);
  CHECK(std::abs(std::conj(c1.weights(0)) * at(0) - 1.0) < 1e-15);

  // Full window without padding equals antenna-space MVDR after lifting.
  auto geom = ArrayGeometry::half_wavelength(4, 8, 10e9);
  BeamspacePlan plan{4, 8};
  BeamspaceTransform t(geom, plan);
  const SpatialFrequencies sf{0.4, -0.7};
  auto a = steering_vector(sf, geom);
  auto y = interference_snapshots(steering_vector({-1.0, 0.5}, geom), 1000.0, 96, rng);
  Eigen::MatrixXcd beam(32, 96);
  for (int n = 0; n < 96; ++n) beam.col(n) = t.forward(Eigen::VectorXcd(y.col(n)));
  auto [row, col] = window_center(sf, plan);
  WindowSpec full{4, 8, row, col};
  Eigen::MatrixXcd wy(32, 96);
  for (int n = 0; n < 96; ++n) wy.col(n) = extract_window(Eigen::VectorXcd(beam.col(n)), plan, full);
  auto antenna = mvdr_correlator(estimate_covariance(y, 0.0), a);
  auto reduced = reduced_mvdr(estimate_covariance(wy, 0.0), windowed_steering(a, t, full));
  auto lifted = lift_correlator(reduced, t, full);
  CHECK((lifted.weights - antenna.weights).norm() < 1e-8 * antenna.weights.norm());
  auto out_a = apply_correlator(antenna, y);
  auto out_b = apply_correlator(reduced, wy);
  CHECK((out_a - out_b).norm() < 1e-8 * out_a.norm());
}

TEST_CASE("in-window interferer is suppressed by at least 20 dB") {
  std::mt19937_64 rng(14);
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspacePlan plan{4, 32};
  BeamspaceTransform t(geom, plan);
  const SpatialFrequencies target{0.0, 0.0};
  const SpatialFrequencies jam{2 * kPi * 1.3 / 32, 0.0};  // inside a 2x4 window
  auto [row, col] = window_center(target, plan);
  WindowSpec w{2, 2, row, col};
  auto y = interference_snapshots(steering_vector(jam, geom), 1000.0, 64, rng);
  Eigen::MatrixXcd wy(w.size(), 64);
  for (int n = 0; n < 64; ++n) wy.col(n) = extract_window(t.forward(Eigen::VectorXcd(y.col(n))), plan, w);
  auto at = windowed_steering(steering_vector(target, geom), t, w);
  auto bt = windowed_steering(steering_vector(jam, geom), t, w);
  auto adaptive = reduced_mvdr(estimate_covariance(wy, 1e-3), at);
  auto fixed = conventional_correlator(at);
  const double p_adaptive = std::norm(adaptive.weights.dot(bt));
  const double p_fixed = std::norm(fixed.weights.dot(bt));
  CHECK(10 * std::log10(p_fixed / p_adaptive) >= 20.0);
}

TEST_CASE("output SINR does not drop when the window grows") {
  std::mt19937_64 rng(15);
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspacePlan plan{4, 32};
  BeamspaceTransform t(geom, plan);
  const SpatialFrequencies target{0.5, 0.2};
  auto y = interference_snapshots(steering_vector({0.65, 0.0}, geom), 500.0, 256, rng);
  auto [row, col] = window_center(target, plan);
  auto a = steering_vector(target, geom);
  double prev = 0.0;
  for (auto [wz, wx] : {std::pair{1, 2}, {2, 4}, {4, 4}, {4, 8}, {4, 16}, {4, 32}}) {
    WindowSpec w{wz, wx, row, col};
    Eigen::MatrixXcd wy(w.size(), 256);
    for (int n = 0; n < 256; ++n)
      wy.col(n) = extract_window(t.forward(Eigen::VectorXcd(y.col(n))), plan, w);
    auto R = estimate_covariance(wy, 0.0);
    auto c = reduced_mvdr(R, windowed_steering(a, t, w));
    const double sinr = 1.0 / output_power(c.weights, R.matrix);
    CHECK(sinr >= prev * (1 - 1e-9));
    prev = sinr;
  }
}

TEST_CASE("lifting") {
  std::mt19937_64 rng(16);
  auto geom = ArrayGeometry::half_wavelength(4, 32, 10e9);
  BeamspacePlan plan{8, 64};
  BeamspaceTransform t(geom, plan);
  WindowSpec w{2, 4, 3, 60};
  Correlator ct{testing::random_eigen(w.size(), rng), CorrelatorSpace::WindowedBeamspace, 2, 5};
  auto lifted = lift_correlator(ct, t, w);
  CHECK(lifted.space == CorrelatorSpace::Antenna);
  CHECK(lifted.target_id == 2);
  CHECK(lifted.weights.size() == 128);

  Eigen::MatrixXcd y = testing::random_matrix(128, 1000, rng);
  Eigen::MatrixXcd wy(w.size(), 1000);
  for (int n = 0; n < 1000; ++n) wy.col(n) = extract_window(t.forward(Eigen::VectorXcd(y.col(n))), plan, w);
  auto direct = apply_correlator(lifted, y);
  auto reduced = apply_correlator(ct, wy);
  CHECK((direct - reduced).cwiseAbs().maxCoeff() < 1e-10);

  // Adjoint identity <c, S D y> = <D^H S^T c, y>.
  auto y0 = testing::random_eigen(128, rng);
  auto lhs = ct.weights.dot(extract_window(t.forward(y0), plan, w));
  auto rhs = lifted.weights.dot(y0);
  CHECK(std::abs(lhs - rhs) < 1e-10);

  // Boresight, full window, no padding: the lift is proportional to a.
  BeamspaceTransform u(geom, {4, 32});
  WindowSpec full{4, 32, 0, 0};
  auto a = steering_vector({0.0, 0.0}, geom);
  Correlator cb{windowed_steering(a, u, full), CorrelatorSpace::WindowedBeamspace};
  auto lb = lift_correlator(cb, u, full);
  CHECK((lb.weights - a).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(lift_correlator(lifted, t, w), DimensionError);
  Correlator wrong{testing::random_eigen(3, rng), CorrelatorSpace::WindowedBeamspace};
  CHECK_THROWS_AS(lift_correlator(wrong, t, w), DimensionError);
}

TEST_CASE("applying a correlator") {
  std::mt19937_64 rng(17);
  Eigen::MatrixXcd y = testing::random_matrix(4, 10, rng);
  Correlator e1{Eigen::VectorXcd::Unit(4, 0)};
  auto out = apply_correlator(e1, y);
  for (int n = 0; n < 10; ++n) CHECK(out(n) == y(0, n));

  auto geom = ArrayGeometry::half_wavelength(2, 2, 10e9);
  auto a = steering_vector({0.3, -0.2}, geom);
  auto c = mvdr_correlator(estimate_covariance(y, 1e-2), a);
  CHECK(std::abs(apply_correlator(c, Eigen::MatrixXcd(a))(0) - 1.0) < 1e-9);

  Eigen::MatrixXcd z = testing::random_matrix(4, 10, rng);
  auto sum = apply_correlator(c, y + z);
  CHECK((sum - apply_correlator(c, y) - apply_correlator(c, z)).cwiseAbs().maxCoeff() < 1e-12);

  OpCounter cnt;
  apply_correlator(c, y, &cnt);
  CHECK(cnt.complex_mults == 40);
  CHECK_THROWS_AS(apply_correlator(c, Eigen::MatrixXcd(3, 2)), DimensionError);

  auto cc = conventional_correlator(a);
  CHECK((cc.weights - a / 4.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("beam pattern") {
  auto geom = ArrayGeometry::half_wavelength(4, 8, 10e9);
  const Direction d0 = Direction::from_degrees(20.0, -10.0);
  auto a0 = steering_vector(spatial_frequencies(d0, 10e9, geom), geom);
  Correlator c{a0 / a0.squaredNorm()};
  auto grid = AngleGrid::uniform_degrees(-60, 60, 25, -30, 30, 13);
  REQUIRE(grid.azimuths.size() == 25);
  CHECK(rad_to_deg(grid.azimuths[0]) == doctest::Approx(-60));
  CHECK(rad_to_deg(grid.azimuths[24]) == doctest::Approx(60));
  auto pattern = beam_pattern(c, grid, geom, 10e9);
  CHECK(pattern.rows() == 13);
  CHECK(pattern.cols() == 25);
  CHECK(pattern.maxCoeff() <= 1.0 + 1e-12);
  CHECK(pattern.minCoeff() >= 0.0);
  // Grid point (az 20, el -10): column 16, row 4.
  CHECK(pattern(4, 16) == doctest::Approx(1.0).epsilon(1e-12));

  std::ostringstream os;
  write_beam_pattern_csv(os, pattern, grid);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "azimuth_deg,elevation_deg,gain_linear,gain_db");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 13 * 25);

  CHECK_THROWS_AS(beam_pattern(Correlator{Eigen::VectorXcd::Zero(32)}, grid, geom, 10e9), DomainError);
  Correlator bs{a0, CorrelatorSpace::WindowedBeamspace};
  CHECK_THROWS_AS(beam_pattern(bs, grid, geom, 10e9), DimensionError);
}
