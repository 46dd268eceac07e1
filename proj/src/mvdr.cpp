#include "bsmvdr/mvdr.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace bsmvdr {

CovarianceEstimate estimate_covariance(const SnapshotView& snapshots, double loading_factor,
                                       OpCounter* counter) {
  const int dim = static_cast<int>(snapshots.rows());
  const int n_t = static_cast<int>(snapshots.cols());
  if (n_t < 1 || dim < 1) throw DimensionError("estimate_covariance: empty snapshot list");
  if (loading_factor < 0) throw ConfigError("estimate_covariance: loading factor must be >= 0");

  // Element-major copy so each inner product runs over contiguous memory.
  const Eigen::MatrixXcd rows = snapshots.transpose();
  CovarianceEstimate est;
  est.n_t = n_t;
  est.matrix.resize(dim, dim);
  const double inv_n = 1.0 / n_t;
  for (int i = 0; i < dim; ++i) {
    const cd* yi = rows.col(i).data();
    for (int j = 0; j <= i; ++j) {
      const cd* yj = rows.col(j).data();
      double re = 0.0;
      double im = 0.0;
      for (int t = 0; t < n_t; ++t) {
        // y_i conj(y_j)
        re += yi[t].real() * yj[t].real() + yi[t].imag() * yj[t].imag();
        im += yi[t].imag() * yj[t].real() - yi[t].real() * yj[t].imag();
      }
      const cd v{re * inv_n, im * inv_n};
      est.matrix(i, j) = v;
      est.matrix(j, i) = std::conj(v);
    }
    est.matrix(i, i) = cd{est.matrix(i, i).real(), 0.0};
  }
  count(counter, static_cast<std::uint64_t>(n_t) * dim * (dim + 1) / 2);

  const double trace = est.matrix.diagonal().real().sum();
  est.loading = loading_factor * trace / dim;
  if (est.loading > 0) est.matrix.diagonal().array() += est.loading;
  return est;
}

HermitianFactor HermitianFactor::factor(const Eigen::MatrixXcd& a, OpCounter* counter) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || n == 0) throw DimensionError("HermitianFactor: matrix must be square and nonempty");
  using RowMajor = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor l = RowMajor::Zero(n, n);
  double min_pivot = std::numeric_limits<double>::infinity();
  std::uint64_t mults = 0;
  for (int j = 0; j < n; ++j) {
    const cd* lj = l.row(j).data();
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(lj[k]);
    mults += j;
    min_pivot = std::min(min_pivot, d);
    if (!(d > 0) || !std::isfinite(d)) {
      std::ostringstream msg;
      msg << "covariance not positive definite: pivot " << j << " = " << d;
      throw NumericalError(msg.str(), j, d);
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const double inv = 1.0 / ljj;
    for (int i = j + 1; i < n; ++i) {
      const cd* li = l.row(i).data();
      cd s = a(i, j);
      for (int k = 0; k < j; ++k) s -= cmul_conj(lj[k], li[k]);
      l(i, j) = s * inv;
    }
    mults += static_cast<std::uint64_t>(n - 1 - j) * j;
  }
  count(counter, mults);
  HermitianFactor f;
  f.lower_ = l;
  f.min_pivot_ = min_pivot;
  return f;
}

Eigen::VectorXcd HermitianFactor::solve(const Eigen::VectorXcd& b, OpCounter* counter) const {
  const int n = dim();
  if (b.size() != n) throw DimensionError("HermitianFactor::solve: size mismatch");
  Eigen::VectorXcd z(n);
  for (int i = 0; i < n; ++i) {
    cd s = b(i);
    for (int k = 0; k < i; ++k) s -= cmul(lower_(i, k), z(k));
    z(i) = s / lower_(i, i).real();
  }
  Eigen::VectorXcd x(n);
  for (int i = n - 1; i >= 0; --i) {
    cd s = z(i);
    for (int k = i + 1; k < n; ++k) s -= cmul_conj(lower_(k, i), x(k));
    x(i) = s / lower_(i, i).real();
  }
  count(counter, static_cast<std::uint64_t>(n) * (n - 1));
  return x;
}

namespace {

Correlator normalize(const Eigen::VectorXcd& a, Eigen::VectorXcd x, OpCounter* counter) {
  // a^H R^{-1} a is real and positive for positive definite R.
  const cd denom = a.dot(x);
  count(counter, a.size());
  if (!(denom.real() > 0) || !std::isfinite(denom.real())) {
    throw NumericalError("mvdr: a^H R^-1 a is not positive", -1, denom.real());
  }
  Correlator c;
  c.weights = x / denom.real();
  return c;
}

}  // namespace

Correlator mvdr_correlator(const HermitianFactor& factor, const Eigen::VectorXcd& a, OpCounter* counter) {
  if (a.size() != factor.dim()) throw DimensionError("mvdr_correlator: steering/covariance size mismatch");
  return normalize(a, factor.solve(a, counter), counter);
}

Correlator mvdr_correlator(const CovarianceEstimate& R, const Eigen::VectorXcd& a, OpCounter* counter) {
  if (a.size() != R.dim()) throw DimensionError("mvdr_correlator: steering/covariance size mismatch");
  return mvdr_correlator(HermitianFactor::factor(R.matrix, counter), a, counter);
}

Correlator reduced_mvdr(const CovarianceEstimate& R_tilde, const Eigen::VectorXcd& a_tilde,
                        OpCounter* counter) {
  Correlator c = mvdr_correlator(R_tilde, a_tilde, counter);
  c.space = CorrelatorSpace::WindowedBeamspace;
  return c;
}

Correlator conventional_correlator(const Eigen::VectorXcd& a) {
  Correlator c;
  c.weights = a / a.squaredNorm();
  return c;
}

Correlator lift_correlator(const Correlator& c_tilde, const BeamspaceTransform& transform,
                           const WindowSpec& w) {
  if (c_tilde.space != CorrelatorSpace::WindowedBeamspace) {
    throw DimensionError("lift_correlator: correlator is not in windowed beamspace");
  }
  if (c_tilde.weights.size() != w.size()) throw DimensionError("lift_correlator: window size mismatch");
  const std::vector<int> idx = window_indices(transform.plan(), w);
  Eigen::VectorXcd beam = Eigen::VectorXcd::Zero(transform.bins());
  for (std::size_t i = 0; i < idx.size(); ++i) beam(idx[i]) += c_tilde.weights(static_cast<Eigen::Index>(i));
  Correlator out;
  out.weights = transform.adjoint(beam);
  out.space = CorrelatorSpace::Antenna;
  out.target_id = c_tilde.target_id;
  out.subband = c_tilde.subband;
  return out;
}

Eigen::VectorXcd apply_correlator(const Correlator& c, const SnapshotView& snapshots, OpCounter* counter) {
  if (snapshots.rows() != c.weights.size()) {
    throw DimensionError("apply_correlator: snapshot length " + std::to_string(snapshots.rows()) +
                         " != correlator length " + std::to_string(c.weights.size()));
  }
  count(counter, static_cast<std::uint64_t>(snapshots.rows()) * snapshots.cols());
  return (c.weights.adjoint() * snapshots).transpose();
}

double output_power(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& R) { return w.dot(R * w).real(); }

AngleGrid AngleGrid::uniform_degrees(double az_min, double az_max, int n_az, double el_min, double el_max,
                                     int n_el) {
  auto axis = [](double lo, double hi, int n) {
    std::vector<double> v(std::max(n, 0));
    for (int i = 0; i < n; ++i) v[i] = deg_to_rad(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return v;
  };
  return {axis(az_min, az_max, n_az), axis(el_min, el_max, n_el)};
}

Eigen::MatrixXd beam_pattern(const Correlator& c, const AngleGrid& grid, const ArrayGeometry& geom,
                             double eval_freq) {
  if (c.space != CorrelatorSpace::Antenna) {
    throw DimensionError("beam_pattern: lift the beamspace correlator to antenna space first");
  }
  if (c.weights.size() != geom.size()) throw DimensionError("beam_pattern: correlator/array size mismatch");
  const double cnorm = c.weights.norm();
  if (!(cnorm > 0)) throw DomainError("beam_pattern: zero-norm correlator");
  Eigen::MatrixXd out(grid.elevations.size(), grid.azimuths.size());
  for (std::size_t e = 0; e < grid.elevations.size(); ++e) {
    for (std::size_t z = 0; z < grid.azimuths.size(); ++z) {
      const SpatialFrequencies sf =
          spatial_frequencies({grid.azimuths[z], grid.elevations[e]}, eval_freq, geom);
      const SteeringVector a = steering_vector(sf, geom);
      const double b = std::abs(c.weights.dot(a)) / (cnorm * a.norm());
      out(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(z)) = std::min(b, 1.0);
    }
  }
  return out;
}

void write_beam_pattern_csv(std::ostream& os, const Eigen::MatrixXd& pattern, const AngleGrid& grid) {
  os << "azimuth_deg,elevation_deg,gain_linear,gain_db\n";
  char line[160];
  for (std::size_t e = 0; e < grid.elevations.size(); ++e) {
    for (std::size_t z = 0; z < grid.azimuths.size(); ++z) {
      const double g = pattern(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(z));
      const double db = 20.0 * std::log10(std::max(g, 1e-15));
      std::snprintf(line, sizeof line, "%.6f,%.6f,%.9e,%.6f\n", rad_to_deg(grid.azimuths[z]),
                    rad_to_deg(grid.elevations[e]), g, db);
      os << line;
    }
  }
}

}  // namespace bsmvdr
