#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "bsmvdr/array_geometry.hpp"
#include "bsmvdr/beamspace.hpp"
#include "bsmvdr/common.hpp"

namespace bsmvdr {

/// Snapshots are the columns of a dim x n_t matrix.
using SnapshotView = Eigen::Ref<const Eigen::MatrixXcd>;

struct CovarianceEstimate {
  Eigen::MatrixXcd matrix;  // Hermitian
  int n_t = 0;
  double loading = 0.0;  // absolute diagonal load delta

  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// R = (1/n_t) sum y y^H + delta I, delta = loading_factor * trace(R)/dim.
/// Only the lower triangle is accumulated; the result is exactly Hermitian.
CovarianceEstimate estimate_covariance(const SnapshotView& snapshots, double loading_factor,
                                       OpCounter* counter = nullptr);

/// Lower Cholesky factor R = L L^H with instrumented triangular solves.
class HermitianFactor {
 public:
  /// Throws NumericalError naming the first non-positive pivot.
  static HermitianFactor factor(const Eigen::MatrixXcd& matrix, OpCounter* counter = nullptr);

  int dim() const { return static_cast<int>(lower_.rows()); }
  /// Smallest pivot L(i,i)^2 seen during factorization.
  double min_pivot() const { return min_pivot_; }
  /// x = R^{-1} b.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b, OpCounter* counter = nullptr) const;

 private:
  Eigen::MatrixXcd lower_;
  double min_pivot_ = 0.0;
};

enum class CorrelatorSpace { Antenna, WindowedBeamspace };

struct Correlator {
  Eigen::VectorXcd weights;
  CorrelatorSpace space = CorrelatorSpace::Antenna;
  int target_id = -1;
  int subband = -1;
};

/// c = R^{-1} a / (a^H R^{-1} a).
Correlator mvdr_correlator(const CovarianceEstimate& R, const Eigen::VectorXcd& a,
                           OpCounter* counter = nullptr);
/// Same, reusing a factorization shared across targets.
Correlator mvdr_correlator(const HermitianFactor& factor, const Eigen::VectorXcd& a,
                           OpCounter* counter = nullptr);

/// MVDR in the W-dimensional windowed beamspace.
Correlator reduced_mvdr(const CovarianceEstimate& R_tilde, const Eigen::VectorXcd& a_tilde,
                        OpCounter* counter = nullptr);

/// Non-adaptive matched beam c = a / ||a||^2.
Correlator conventional_correlator(const Eigen::VectorXcd& a);

/// c_hat = D^H S^T c_tilde.
Correlator lift_correlator(const Correlator& c_tilde, const BeamspaceTransform& transform,
                           const WindowSpec& w);

/// out[n] = c^H y[n] for every column of `snapshots`.
Eigen::VectorXcd apply_correlator(const Correlator& c, const SnapshotView& snapshots,
                                  OpCounter* counter = nullptr);

/// Output power w^H R w.
double output_power(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& R);

struct AngleGrid {
  std::vector<double> azimuths;    // radians
  std::vector<double> elevations;  // radians

  /// Inclusive uniform grid in degrees.
  static AngleGrid uniform_degrees(double az_min, double az_max, int n_az, double el_min,
                                   double el_max, int n_el);
};

/// B(az, el) = |<c, a(az, el)>| / (||c|| ||a||); rows = elevation, cols = azimuth.
Eigen::MatrixXd beam_pattern(const Correlator& c, const AngleGrid& grid, const ArrayGeometry& geom,
                             double eval_freq);

/// CSV: azimuth_deg,elevation_deg,gain_linear,gain_db (gain_db = 20 log10 B).
void write_beam_pattern_csv(std::ostream& os, const Eigen::MatrixXd& pattern, const AngleGrid& grid);

}  // namespace bsmvdr
