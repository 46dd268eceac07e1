#include "bsmvdr/array_geometry.hpp"

#include <cmath>
#include <string>

namespace bsmvdr {

ArrayGeometry ArrayGeometry::half_wavelength(int n_z, int n_x, double design_freq) {
  ArrayGeometry g;
  g.n_z = n_z;
  g.n_x = n_x;
  g.design_freq = design_freq;
  g.spacing = design_freq > 0 ? 0.5 * kSpeedOfLight / design_freq : 0.0;
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (n_z < 1 || n_x < 1) {
    throw ConfigError("array: n_z and n_x must be >= 1 (got " + std::to_string(n_z) + "x" +
                      std::to_string(n_x) + ")");
  }
  if (!(design_freq > 0)) throw ConfigError("array: design_freq must be > 0");
  if (!(spacing > 0)) throw ConfigError("array: spacing must be > 0");
}

void Direction::validate() const {
  if (!(std::abs(azimuth) < kPi / 2) || !(std::abs(elevation) < kPi / 2)) {
    throw DomainError("direction outside the front hemisphere: azimuth " +
                      std::to_string(rad_to_deg(azimuth)) + " deg, elevation " +
                      std::to_string(rad_to_deg(elevation)) + " deg");
  }
}

double subband_center_freq(int l, int num_subbands, double carrier_freq, double sample_rate) {
  if (num_subbands < 2 || num_subbands % 2 != 0) {
    throw DomainError("subband_center_freq: L must be even and >= 2");
  }
  const int lo = -num_subbands / 2 + 1;
  const int hi = num_subbands / 2;
  if (l < lo || l > hi) {
    throw DomainError("subband_center_freq: index " + std::to_string(l) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return carrier_freq + ((l - 0.5) / num_subbands) * sample_rate;
}

SpatialFrequencies spatial_frequencies(const Direction& dir, double eval_freq,
                                       const ArrayGeometry& geom) {
  if (!(eval_freq > 0)) throw DomainError("spatial_frequencies: eval_freq must be > 0");
  // 2 pi d / lambda(f); equals pi f / f_d when d = lambda_d / 2.
  const double k = 2.0 * kPi * geom.spacing * eval_freq / kSpeedOfLight;
  return {k * std::cos(dir.elevation) * std::sin(dir.azimuth), k * std::sin(dir.elevation)};
}

SteeringVector steering_vector(const SpatialFrequencies& sf, const ArrayGeometry& geom) {
  Eigen::VectorXcd ax(geom.n_x);
  Eigen::VectorXcd az(geom.n_z);
  for (int cx = 0; cx < geom.n_x; ++cx) ax(cx) = std::polar(1.0, sf.omega_x * cx);
  for (int rz = 0; rz < geom.n_z; ++rz) az(rz) = std::polar(1.0, sf.omega_z * rz);
  SteeringVector a(geom.size());
  for (int cx = 0; cx < geom.n_x; ++cx) {
    for (int rz = 0; rz < geom.n_z; ++rz) a(geom.element_index(rz, cx)) = ax(cx) * az(rz);
  }
  return a;
}

}  // namespace bsmvdr
