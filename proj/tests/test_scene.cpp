#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsmvdr/detection.hpp"
#include "bsmvdr/scene.hpp"

using namespace bsmvdr;

namespace {

ChirpParams small_radio() {
  ChirpParams cp;
  cp.pulse_samples = 256;
  cp.num_pulses = 8;
  cp.bandwidth = 200e6;
  return cp;
}

TargetSpec target_at(double range, double az_deg, double el_deg, double v = 0.0) {
  const Direction d = Direction::from_degrees(az_deg, el_deg);
  TargetSpec t;
  t.position = {range * std::cos(d.elevation) * std::sin(d.azimuth),
                range * std::cos(d.elevation) * std::cos(d.azimuth), range * std::sin(d.elevation)};
  t.radial_velocity = v;
  return t;
}

double energy(const DataCube& c) {
  double e = 0.0;
  for (auto v : c.data()) e += std::norm(v);
  return e;
}

}  // namespace

TEST_CASE("chirp examples") {
  ChirpParams cp;
  cp.bandwidth = 0.0;
  cp.pulse_samples = 64;
  auto p = generate_chirp(cp);
  for (auto v : p) CHECK(std::abs(v - p[0]) < 1e-12);

  cp.pulse_samples = 1;
  p = generate_chirp(cp);
  REQUIRE(p.size() == 1);
  CHECK(std::abs(p[0]) == doctest::Approx(1.0));

  cp.pulse_samples = 1024;
  cp.bandwidth = cp.sample_rate / 2;
  p = generate_chirp(cp);
  for (auto v : p) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-14));
  const double slope = cp.bandwidth / cp.duration();
  double max_dev = 0.0;
  for (int n = 0; n + 1 < cp.pulse_samples; ++n) {
    const double f = std::arg(p[n + 1] * std::conj(p[n])) * cp.sample_rate / (2 * kPi);
    const double expected = -cp.bandwidth / 2 + slope * (n + 0.5) / cp.sample_rate;
    max_dev = std::max(max_dev, std::abs(f - expected));
  }
  CHECK(max_dev < 0.01 * cp.bandwidth);
  CHECK(chirp_instantaneous_freq(cp, 0) == doctest::Approx(-cp.bandwidth / 2));
}

TEST_CASE("chirp validation") {
  ChirpParams cp;
  CHECK_NOTHROW(cp.validate());
  cp.bandwidth = 2 * cp.sample_rate;
  CHECK_THROWS_AS(cp.validate(), ConfigError);
  cp = {};
  cp.num_pulses = 1;
  CHECK_THROWS_AS(cp.validate(), ConfigError);
  cp = {};
  cp.pulse_samples = 0;
  CHECK_THROWS_AS(cp.validate(), ConfigError);
}

TEST_CASE("pure noise statistics") {
  auto cp = small_radio();
  cp.num_pulses = 32;
  auto geom = ArrayGeometry::half_wavelength(4, 4, cp.carrier_freq);
  Scenario sc;
  sc.noise_power = 1.0;
  sc.seed = 5;
  auto cube = synthesize_datacube(sc, geom, cp);
  const double n = static_cast<double>(cube.data().size());
  REQUIRE(n >= 1e5);
  cd mean = 0.0;
  for (auto v : cube.data()) mean += v;
  CHECK(std::abs(mean / n) < 0.02);
  CHECK(energy(cube) / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("boresight target is coherent across the array") {
  auto cp = small_radio();
  auto geom = ArrayGeometry::half_wavelength(2, 4, cp.carrier_freq);
  Scenario sc;
  sc.noise_power = 0.0;
  sc.targets.push_back(target_at(100 * cp.range_resolution(), 0.0, 0.0));
  auto cube = synthesize_datacube(sc, geom, cp);
  for (int a = 1; a < cube.antennas(); ++a)
    for (int p = 0; p < cube.pulses(); ++p)
      for (int s = 0; s < cube.samples(); ++s) CHECK(cube.at(a, s, p) == cube.at(0, s, p));

  // Power accounting: N * sum |p|^2 * pulses.
  const double expected = geom.size() * double(cp.pulse_samples) * cp.num_pulses;
  CHECK(energy(cube) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("matched filter peak lands on the target range bin") {
  auto cp = small_radio();
  auto geom = ArrayGeometry::half_wavelength(2, 2, cp.carrier_freq);
  for (int bin : {17, 140}) {
    Scenario sc;
    sc.noise_power = 0.0;
    sc.targets.push_back(target_at(bin * cp.range_resolution(), 10.0, 5.0, 3 * cp.velocity_resolution()));
    auto cube = synthesize_datacube(sc, geom, cp);
    auto map = range_doppler_map(antenna_series(cube, 0), generate_chirp(cp), cp);
    auto it = std::max_element(map.power.begin(), map.power.end());
    const int flat = static_cast<int>(it - map.power.begin());
    const auto truth = target_truth(sc.targets[0], cp);
    CHECK(truth.range_bin == bin);
    CHECK(truth.doppler_bin == 3);
    CHECK(flat / map.velocity_bins == bin);
    CHECK(flat % map.velocity_bins == map.velocity_column(3));
  }
}

TEST_CASE("synthesis is deterministic per seed") {
  auto cp = small_radio();
  auto geom = ArrayGeometry::half_wavelength(2, 4, cp.carrier_freq);
  auto sc = scenario_preset("C2", 11, cp);
  auto a = synthesize_datacube(sc, geom, cp);
  auto b = synthesize_datacube(sc, geom, cp);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  sc.seed = 12;
  auto c = synthesize_datacube(sc, geom, cp);
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST_CASE("superposition of targets") {
  auto cp = small_radio();
  auto geom = ArrayGeometry::half_wavelength(2, 4, cp.carrier_freq);
  Scenario a, b, ab;
  a.noise_power = b.noise_power = ab.noise_power = 0.0;
  a.targets.push_back(target_at(30 * cp.range_resolution(), -20, 10, cp.velocity_resolution()));
  b.targets.push_back(target_at(90 * cp.range_resolution(), 15, 20, -2 * cp.velocity_resolution()));
  b.targets.back().amplitude = {0.3, -0.7};
  ab.targets = {a.targets[0], b.targets[0]};
  auto ca = synthesize_datacube(a, geom, cp);
  auto cb = synthesize_datacube(b, geom, cp);
  auto cab = synthesize_datacube(ab, geom, cp);
  for (std::size_t i = 0; i < cab.data().size(); ++i)
    CHECK(cab.data()[i] == ca.data()[i] + cb.data()[i]);

  // Multi-target halves: equal up to addition order.
  Scenario c = ab, abc = ab;
  c.targets = {target_at(50 * cp.range_resolution(), 5, 30)};
  abc.targets.push_back(c.targets[0]);
  auto cc = synthesize_datacube(c, geom, cp);
  auto cabc = synthesize_datacube(abc, geom, cp);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < cabc.data().size(); ++i) {
    err = std::max(err, std::abs(cabc.data()[i] - cab.data()[i] - cc.data()[i]));
    ref = std::max(ref, std::abs(cabc.data()[i]));
  }
  CHECK(err <= 1e-12 * ref);
}

TEST_CASE("target outside the pulse window is rejected") {
  auto cp = small_radio();
  auto geom = ArrayGeometry::half_wavelength(2, 2, cp.carrier_freq);
  Scenario sc;
  sc.targets.push_back(target_at(cp.max_range() + 10.0, 0, 0));
  CHECK_THROWS_AS(synthesize_datacube(sc, geom, cp), ConfigError);
}

TEST_CASE("presets") {
  const ChirpParams cp;
  CHECK(preset_names().size() == 11);
  auto a1 = scenario_preset("A1", 1, cp);
  CHECK(a1.targets.size() == 20);
  CHECK(a1.interferers.size() == 2);

  auto e2 = scenario_preset("E2", 1, cp);
  CHECK(e2.targets.size() == 20);
  CHECK(e2.interferers.size() == 16);
  const double el_g = PresetGeometry::ground_elevation();
  double min_sep = 1e9;
  for (const auto& t : e2.targets) min_sep = std::min(min_sep, t.direction().elevation - el_g);
  CHECK(rad_to_deg(min_sep) >= 12.5 - 1e-9);
  for (const auto& it : e2.interferers) CHECK(it.direction.elevation < 0.0);

  CHECK(scenario_preset("noninterferer", 1, cp).interferers.empty());

  int prev = 0;
  for (char c : std::string("ABCDE")) {
    const int n = preset_interferer_count(c);
    CHECK(n >= prev);
    prev = n;
  }

  // Easy scenes keep targets 25..50 deg above the ground reference.
  for (const auto& t : a1.targets) {
    const double sep = rad_to_deg(t.direction().elevation - el_g);
    CHECK(sep >= 25.0 - 1e-9);
    CHECK(sep <= 50.0 + 1e-9);
  }
  // Targets sit on the grid and inside the unambiguous window.
  for (const auto& t : a1.targets) {
    const auto truth = target_truth(t, cp);
    CHECK(truth.range_bin > 0);
    CHECK(truth.range_bin < cp.pulse_samples);
    CHECK(std::abs(t.radial_velocity) < cp.max_velocity());
  }
  CHECK_THROWS_AS(scenario_preset("F1", 1, cp), ConfigError);
  CHECK_THROWS_AS(scenario_preset("A3", 1, cp), ConfigError);
}
