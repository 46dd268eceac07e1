#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bsmvdr/array_geometry.hpp"
#include "bsmvdr/fft.hpp"

namespace bsmvdr {

/// Spatial FFT sizes. m_z >= n_z and m_x >= n_x; larger sizes zero-pad.
struct BeamspacePlan {
  int m_z = 4;
  int m_x = 32;

  int size() const { return m_z * m_x; }
  void validate(const ArrayGeometry& geom) const;
};

/// Rectangular beamspace window of w_z x w_x bins around (center_row,
/// center_col). The window spans floor(w/2) bins below the center and
/// w - 1 - floor(w/2) above on each axis, wrapping modulo the FFT size.
/// Windowed vectors keep the vertical axis fastest.
struct WindowSpec {
  int w_z = 2;
  int w_x = 4;
  int center_row = 0;
  int center_col = 0;

  int size() const { return w_z * w_x; }
  void validate(const BeamspacePlan& plan) const;
};

/// The 2D beamspace transform D = D_h^T (x) D_v with 1/sqrt(M) scaling,
///   [D_v]_{m,n} = exp(-j 2 pi m n / M_z) / sqrt(M_z),
///   [D_h]_{n,m} = exp(-j 2 pi m n / M_x) / sqrt(M_x),
/// evaluated with a zero-padded 2D FFT. Beamspace bin (row, col) is stored
/// at col * m_z + row. Immutable after construction; shareable.
class BeamspaceTransform {
 public:
  BeamspaceTransform(const ArrayGeometry& geom, const BeamspacePlan& plan);

  const BeamspacePlan& plan() const { return plan_; }
  int antennas() const { return n_z_ * n_x_; }
  int bins() const { return plan_.size(); }

  /// beam = D y.
  void forward(std::span<const cd> y, std::span<cd> beam, OpCounter* counter = nullptr) const;
  Eigen::VectorXcd forward(const Eigen::VectorXcd& y, OpCounter* counter = nullptr) const;

  /// y = D^H beam.
  void adjoint(std::span<const cd> beam, std::span<cd> y, OpCounter* counter = nullptr) const;
  Eigen::VectorXcd adjoint(const Eigen::VectorXcd& beam, OpCounter* counter = nullptr) const;

  /// Complex multiplies of one forward transform.
  std::uint64_t mults_per_transform() const;

 private:
  template <bool Inverse>
  void columns_then_rows(std::span<cd> grid, int active_cols, OpCounter* counter) const;

  int n_z_, n_x_;
  BeamspacePlan plan_;
  double scale_;
  FftPlan fft_z_;
  FftPlan fft_x_;
};

/// Beamspace bin nearest to a plane wave with spatial frequencies `sf`:
///   row = round(omega_z m_z / 2 pi) mod m_z,
///   col = round(omega_x m_x / 2 pi) mod m_x,
/// ties rounded to even.
std::pair<int, int> window_center(const SpatialFrequencies& sf, const BeamspacePlan& plan);

/// Beamspace bin indices selected by the window, in windowed order. This is
/// the row support of the selector matrix S_k.
std::vector<int> window_indices(const BeamspacePlan& plan, const WindowSpec& w);

void extract_window(std::span<const cd> beam, const BeamspacePlan& plan, const WindowSpec& w,
                    std::span<cd> out);
Eigen::VectorXcd extract_window(const Eigen::VectorXcd& beam, const BeamspacePlan& plan,
                                const WindowSpec& w);

/// S_k D a.
Eigen::VectorXcd windowed_steering(const SteeringVector& a, const BeamspaceTransform& transform,
                                   const WindowSpec& w, OpCounter* counter = nullptr);

}  // namespace bsmvdr
