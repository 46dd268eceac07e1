#pragma once

#include <span>
#include <vector>

#include "bsmvdr/common.hpp"
#include "bsmvdr/scene.hpp"

namespace bsmvdr {

// Critically sampled block-DFT filter bank. Fast time is cut into
// consecutive blocks of L samples; each block is modulated by
// exp(+j pi i / L) and transformed with an unscaled L-point DFT, so DFT bin
// k is centered at baseband frequency ((k - 1/2) / L) f_s. Bin k carries
// subband l with l = k (mod L), l in {-L/2+1, ..., L/2}. Subbands are stored
// in increasing l: storage index b = l + L/2 - 1. Synthesis applies the
// inverse DFT scaled by 1/L and removes the modulation. L = 1 is a
// passthrough.

/// Subband number l for storage index b.
int subband_number(int b, int num_subbands);
/// Storage index b for subband number l.
int subband_storage(int l, int num_subbands);
/// RF center frequency of the subband at storage index b.
double subband_frequency(int b, int num_subbands, const ChirpParams& cp);

/// Per-antenna subband snapshots. Logical index (antenna, subband, snapshot,
/// pulse); stored subband-major with the antenna axis contiguous, so the
/// snapshots of one subband form a dense (antenna x pulse*snapshot) block
/// in pulse-major order.
class SubbandCube {
 public:
  SubbandCube() = default;
  SubbandCube(int antennas, int num_subbands, int snapshots, int pulses);

  int antennas() const { return antennas_; }
  int num_subbands() const { return num_subbands_; }
  int snapshots() const { return snapshots_; }
  int pulses() const { return pulses_; }
  int snapshots_per_subband() const { return snapshots_ * pulses_; }

  cd& at(int antenna, int b, int snapshot, int pulse) {
    return data_[offset(b, snapshot, pulse) + antenna];
  }
  cd at(int antenna, int b, int snapshot, int pulse) const {
    return data_[offset(b, snapshot, pulse) + antenna];
  }

  /// One spatial snapshot (all antennas).
  std::span<const cd> snapshot(int b, int snapshot, int pulse) const {
    return {data_.data() + offset(b, snapshot, pulse), static_cast<std::size_t>(antennas_)};
  }
  /// All snapshots of subband b: pulses * snapshots vectors of length N.
  std::span<const cd> subband(int b) const {
    return {data_.data() + offset(b, 0, 0), static_cast<std::size_t>(antennas_) * snapshots_per_subband()};
  }

 private:
  std::size_t offset(int b, int snapshot, int pulse) const {
    return ((static_cast<std::size_t>(b) * pulses_ + pulse) * snapshots_ + snapshot) * antennas_;
  }

  int antennas_ = 0;
  int num_subbands_ = 0;
  int snapshots_ = 0;
  int pulses_ = 0;
  std::vector<cd> data_;
};

/// One channel in the subband domain, stored [subband][pulse][snapshot].
struct SubbandSeries {
  int num_subbands = 0;
  int snapshots = 0;
  int pulses = 0;
  std::vector<cd> data;

  SubbandSeries() = default;
  SubbandSeries(int L, int snaps, int p)
      : num_subbands(L), snapshots(snaps), pulses(p),
        data(static_cast<std::size_t>(L) * snaps * p) {}

  cd& at(int b, int snapshot, int pulse) {
    return data[(static_cast<std::size_t>(b) * pulses + pulse) * snapshots + snapshot];
  }
  cd at(int b, int snapshot, int pulse) const {
    return data[(static_cast<std::size_t>(b) * pulses + pulse) * snapshots + snapshot];
  }
  std::span<cd> subband(int b) {
    return {data.data() + static_cast<std::size_t>(b) * pulses * snapshots,
            static_cast<std::size_t>(pulses) * snapshots};
  }
};

/// One channel in the wideband domain, stored [pulse][sample].
struct WidebandSeries {
  int samples = 0;
  int pulses = 0;
  std::vector<cd> data;

  WidebandSeries() = default;
  WidebandSeries(int s, int p) : samples(s), pulses(p), data(static_cast<std::size_t>(s) * p) {}

  cd& at(int sample, int pulse) { return data[static_cast<std::size_t>(pulse) * samples + sample]; }
  cd at(int sample, int pulse) const {
    return data[static_cast<std::size_t>(pulse) * samples + sample];
  }
  std::span<cd> pulse(int m) {
    return {data.data() + static_cast<std::size_t>(m) * samples, static_cast<std::size_t>(samples)};
  }
  std::span<const cd> pulse(int m) const {
    return {data.data() + static_cast<std::size_t>(m) * samples, static_cast<std::size_t>(samples)};
  }
};

/// Checks L against the fast-time length; throws ConfigError.
void validate_subband_count(int pulse_samples, int num_subbands);

SubbandCube channelize(const DataCube& cube, int num_subbands, OpCounter* counter = nullptr);
SubbandSeries channelize(const WidebandSeries& x, int num_subbands, OpCounter* counter = nullptr);
WidebandSeries synthesize(const SubbandSeries& subbands, OpCounter* counter = nullptr);

/// The wideband record of one antenna.
WidebandSeries antenna_series(const DataCube& cube, int antenna);

}  // namespace bsmvdr
