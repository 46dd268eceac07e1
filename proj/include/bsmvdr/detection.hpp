#pragma once

#include <span>
#include <vector>

#include "bsmvdr/channelizer.hpp"
#include "bsmvdr/scene.hpp"

namespace bsmvdr {

/// Power over (range bin, velocity bin). Velocity bins are FFT-shifted:
/// bin zero_velocity_bin() holds zero Doppler and higher bins are closing.
struct RangeDopplerMap {
  int range_bins = 0;
  int velocity_bins = 0;
  std::vector<double> power;  // [range][velocity]
  double range_resolution = 0.0;     // m / bin
  double velocity_resolution = 0.0;  // m/s / bin
  int target_id = -1;

  RangeDopplerMap() = default;
  RangeDopplerMap(int r, int v) : range_bins(r), velocity_bins(v), power(static_cast<std::size_t>(r) * v) {}

  double& at(int r, int v) { return power[static_cast<std::size_t>(r) * velocity_bins + v]; }
  double at(int r, int v) const { return power[static_cast<std::size_t>(r) * velocity_bins + v]; }
  int zero_velocity_bin() const { return velocity_bins / 2; }
  /// Map column of a signed Doppler bin.
  int velocity_column(int doppler_bin) const;
};

/// Circular matched filter per pulse (multiply by the conjugate replica
/// spectrum), then a DFT across pulses per range bin, FFT-shifted.
RangeDopplerMap range_doppler_map(const WidebandSeries& output, std::span<const cd> replica,
                                  const ChirpParams& cp, OpCounter* counter = nullptr);

enum class FloorEstimator { Median, Mean };

struct CfarParams {
  double threshold_db = 10.0;
  int guard = 4;  // guard cells on each side of the test cell
  FloorEstimator floor = FloorEstimator::Median;
  /// Reference cells on each side beyond the guards; 0 uses the whole column.
  int window = 0;
};

struct Detection {
  int range_bin = 0;
  int velocity_bin = 0;
  double power_db_over_floor = 0.0;
};

/// 1D CFAR along range for every velocity column, followed by 3x3 local
/// maximum suppression (circular on both axes).
std::vector<Detection> cfar_detect(const RangeDopplerMap& map, const CfarParams& params = {});

/// Noise floor of every cell of one column, as used by cfar_detect.
std::vector<double> cfar_floor(std::span<const double> column, const CfarParams& params);

struct TruthCell {
  int target_id = -1;
  int range_bin = 0;
  int velocity_bin = 0;  // map column
};

struct Gate {
  int range_bins = 5;
  int velocity_bins = 3;
};

/// Misses carry an infinite error.
struct DetectionScore {
  int target_id = -1;
  bool detected = false;
  double range_error_m = 0.0;
  double velocity_error_mps = 0.0;
};

TruthCell truth_cell(const TargetSpec& t, int target_id, const ChirpParams& cp, const RangeDopplerMap& map);

/// Nearest detection inside the gate (circular distances) wins.
DetectionScore score_detections(const std::vector<Detection>& dets, const TruthCell& truth,
                                const RangeDopplerMap& map, const Gate& gate = {});

}  // namespace bsmvdr
