#pragma once

#include <Eigen/Dense>

#include "bsmvdr/common.hpp"

namespace bsmvdr {

/// Uniform planar array in the x-z plane, broadside along +y.
///
/// Elements are indexed with the vertical index varying fastest:
/// element (row_z, col_x) sits at flat index col_x * n_z + row_z. This is
/// the order produced by the Kronecker product a_x (x) a_z and is shared by
/// the beamspace transform and the windowing code.
struct ArrayGeometry {
  int n_z = 4;
  int n_x = 32;
  double spacing = 0.0;      // meters
  double design_freq = 0.0;  // Hz

  /// Spacing set to half a wavelength at the design frequency.
  static ArrayGeometry half_wavelength(int n_z, int n_x, double design_freq);

  int size() const { return n_z * n_x; }
  int element_index(int row_z, int col_x) const { return col_x * n_z + row_z; }
  double design_wavelength() const { return kSpeedOfLight / design_freq; }

  void validate() const;
};

/// Azimuth measured from +y toward +x, elevation from +y toward +z. Radians.
struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;

  static Direction from_degrees(double azimuth_deg, double elevation_deg) {
    return {deg_to_rad(azimuth_deg), deg_to_rad(elevation_deg)};
  }
  void validate() const;
};

/// Phase progression per element along each axis, radians/element.
struct SpatialFrequencies {
  double omega_x = 0.0;
  double omega_z = 0.0;
};

using SteeringVector = Eigen::VectorXcd;

/// Center frequency of subband l in {-L/2+1, ..., L/2}:
///   f(l) = f_c + ((l - 1/2) / L) f_s
double subband_center_freq(int l, int num_subbands, double carrier_freq, double sample_rate);

/// Spatial frequencies of a plane wave from `dir` observed at `eval_freq`.
/// For half-wavelength spacing this is
///   omega_x = pi cos(el) sin(az) f / f_d,  omega_z = pi sin(el) f / f_d.
SpatialFrequencies spatial_frequencies(const Direction& dir, double eval_freq,
                                       const ArrayGeometry& geom);

/// a = a_x(omega_x) (x) a_z(omega_z); unit-modulus entries, first entry 1.
SteeringVector steering_vector(const SpatialFrequencies& sf, const ArrayGeometry& geom);

}  // namespace bsmvdr
