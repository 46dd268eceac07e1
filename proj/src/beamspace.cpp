#include "bsmvdr/beamspace.hpp"

#include <cmath>
#include <string>

namespace bsmvdr {

void BeamspacePlan::validate(const ArrayGeometry& geom) const {
  if (m_z < geom.n_z || m_x < geom.n_x) {
    throw ConfigError("beamspace: FFT size " + std::to_string(m_z) + "x" + std::to_string(m_x) +
                      " smaller than the array " + std::to_string(geom.n_z) + "x" +
                      std::to_string(geom.n_x));
  }
}

void WindowSpec::validate(const BeamspacePlan& plan) const {
  if (w_z < 1 || w_z > plan.m_z || w_x < 1 || w_x > plan.m_x) {
    throw ConfigError("beamspace: window " + std::to_string(w_z) + "x" + std::to_string(w_x) +
                      " does not fit FFT size " + std::to_string(plan.m_z) + "x" +
                      std::to_string(plan.m_x));
  }
  if (center_row < 0 || center_row >= plan.m_z || center_col < 0 || center_col >= plan.m_x) {
    throw ConfigError("beamspace: window center outside the beamspace grid");
  }
}

BeamspaceTransform::BeamspaceTransform(const ArrayGeometry& geom, const BeamspacePlan& plan)
    : n_z_(geom.n_z),
      n_x_(geom.n_x),
      plan_(plan),
      scale_(1.0 / std::sqrt(static_cast<double>(plan.size()))),
      fft_z_(static_cast<std::size_t>(plan.m_z)),
      fft_x_(static_cast<std::size_t>(plan.m_x)) {
  plan.validate(geom);
}

std::uint64_t BeamspaceTransform::mults_per_transform() const {
  // Vertical FFTs run only on the n_x occupied columns.
  return static_cast<std::uint64_t>(n_x_) * fft_z_.mults_per_transform() +
         static_cast<std::uint64_t>(plan_.m_z) * fft_x_.mults_per_transform();
}

template <bool Inverse>
void BeamspaceTransform::columns_then_rows(std::span<cd> grid, int active_cols,
                                           OpCounter* counter) const {
  const int mz = plan_.m_z;
  const int mx = plan_.m_x;
  for (int c = 0; c < active_cols; ++c) {
    std::span<cd> col = grid.subspan(static_cast<std::size_t>(c) * mz, mz);
    if constexpr (Inverse) {
      fft_z_.inverse(col, counter);
    } else {
      fft_z_.forward(col, counter);
    }
  }
  std::vector<cd> row(mx);
  for (int r = 0; r < mz; ++r) {
    for (int c = 0; c < mx; ++c) row[c] = grid[static_cast<std::size_t>(c) * mz + r];
    if constexpr (Inverse) {
      fft_x_.inverse(row, counter);
    } else {
      fft_x_.forward(row, counter);
    }
    for (int c = 0; c < mx; ++c) grid[static_cast<std::size_t>(c) * mz + r] = row[c];
  }
}

void BeamspaceTransform::forward(std::span<const cd> y, std::span<cd> beam, OpCounter* counter) const {
  if (y.size() != static_cast<std::size_t>(antennas()) || beam.size() != static_cast<std::size_t>(bins())) {
    throw DimensionError("beamspace_transform: expected " + std::to_string(antennas()) +
                         " antennas in and " + std::to_string(bins()) + " bins out");
  }
  const int mz = plan_.m_z;
  std::fill(beam.begin(), beam.end(), cd{});
  for (int c = 0; c < n_x_; ++c) {
    for (int r = 0; r < n_z_; ++r) beam[static_cast<std::size_t>(c) * mz + r] = y[c * n_z_ + r];
  }
  columns_then_rows<false>(beam, n_x_, counter);
  for (cd& v : beam) v *= scale_;
}

Eigen::VectorXcd BeamspaceTransform::forward(const Eigen::VectorXcd& y, OpCounter* counter) const {
  Eigen::VectorXcd out(bins());
  forward(std::span<const cd>(y.data(), y.size()), std::span<cd>(out.data(), out.size()), counter);
  return out;
}

void BeamspaceTransform::adjoint(std::span<const cd> beam, std::span<cd> y, OpCounter* counter) const {
  if (y.size() != static_cast<std::size_t>(antennas()) || beam.size() != static_cast<std::size_t>(bins())) {
    throw DimensionError("beamspace adjoint: expected " + std::to_string(bins()) +
                         " bins in and " + std::to_string(antennas()) + " antennas out");
  }
  const int mz = plan_.m_z;
  std::vector<cd> grid(beam.begin(), beam.end());
  // D^H = unscaled inverse 2D DFT, scaled by 1/sqrt(M) and truncated to the array.
  columns_then_rows<true>(grid, plan_.m_x, counter);
  for (int c = 0; c < n_x_; ++c) {
    for (int r = 0; r < n_z_; ++r) y[c * n_z_ + r] = grid[static_cast<std::size_t>(c) * mz + r] * scale_;
  }
}

Eigen::VectorXcd BeamspaceTransform::adjoint(const Eigen::VectorXcd& beam, OpCounter* counter) const {
  Eigen::VectorXcd out(antennas());
  adjoint(std::span<const cd>(beam.data(), beam.size()), std::span<cd>(out.data(), out.size()), counter);
  return out;
}

std::pair<int, int> window_center(const SpatialFrequencies& sf, const BeamspacePlan& plan) {
  auto bin = [](double omega, int m) {
    const long r = std::lrint(omega * m / (2.0 * kPi));  // round half to even
    const long mm = m;
    return static_cast<int>(((r % mm) + mm) % mm);
  };
  return {bin(sf.omega_z, plan.m_z), bin(sf.omega_x, plan.m_x)};
}

std::vector<int> window_indices(const BeamspacePlan& plan, const WindowSpec& w) {
  w.validate(plan);
  std::vector<int> idx;
  idx.reserve(w.size());
  const int row0 = w.center_row - w.w_z / 2;
  const int col0 = w.center_col - w.w_x / 2;
  for (int j = 0; j < w.w_x; ++j) {
    const int col = ((col0 + j) % plan.m_x + plan.m_x) % plan.m_x;
    for (int i = 0; i < w.w_z; ++i) {
      const int row = ((row0 + i) % plan.m_z + plan.m_z) % plan.m_z;
      idx.push_back(col * plan.m_z + row);
    }
  }
  return idx;
}

void extract_window(std::span<const cd> beam, const BeamspacePlan& plan, const WindowSpec& w,
                    std::span<cd> out) {
  if (beam.size() != static_cast<std::size_t>(plan.size()) || out.size() != static_cast<std::size_t>(w.size())) {
    throw DimensionError("extract_window: size mismatch");
  }
  const std::vector<int> idx = window_indices(plan, w);
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = beam[idx[i]];
}

Eigen::VectorXcd extract_window(const Eigen::VectorXcd& beam, const BeamspacePlan& plan,
                                const WindowSpec& w) {
  Eigen::VectorXcd out(w.size());
  extract_window(std::span<const cd>(beam.data(), beam.size()), plan, w,
                 std::span<cd>(out.data(), out.size()));
  return out;
}

Eigen::VectorXcd windowed_steering(const SteeringVector& a, const BeamspaceTransform& transform,
                                   const WindowSpec& w, OpCounter* counter) {
  return extract_window(transform.forward(a, counter), transform.plan(), w);
}

}  // namespace bsmvdr
