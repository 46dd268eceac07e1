#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsmvdr/array_geometry.hpp"
#include "bsmvdr/common.hpp"

namespace bsmvdr {

/// Radio and waveform parameters of one coherent processing interval.
struct ChirpParams {
  double carrier_freq = 10e9;  // f_c, Hz
  double sample_rate = 500e6;  // f_s, Hz
  double bandwidth = 400e6;    // swept bandwidth, Hz
  int pulse_samples = 4096;    // fast-time samples per pulse
  int num_pulses = 64;
  double pri = 100e-6;  // pulse repetition interval, s

  void validate() const;

  double duration() const { return pulse_samples / sample_rate; }
  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  /// Range per fast-time sample, c / (2 f_s).
  double range_resolution() const { return kSpeedOfLight / (2.0 * sample_rate); }
  /// Velocity per Doppler bin, lambda / (2 P pri).
  double velocity_resolution() const { return wavelength() / (2.0 * num_pulses * pri); }
  double max_range() const { return pulse_samples * range_resolution(); }
  /// Largest unambiguous closing speed, lambda / (4 pri).
  double max_velocity() const { return wavelength() / (4.0 * pri); }
};

/// Baseband LFM sweep from -bandwidth/2 to +bandwidth/2 over pulse_samples,
/// unit amplitude: p[n] = exp(j 2 pi (-B/2 t + B/(2T) t^2)), t = n / f_s.
std::vector<cd> generate_chirp(const ChirpParams& cp);

/// Baseband instantaneous frequency of the chirp at fast-time sample n.
double chirp_instantaneous_freq(const ChirpParams& cp, double n);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Direction of a point seen from the array origin.
Direction direction_of(const Vec3& position);

struct TargetSpec {
  Vec3 position;               // meters, array at the origin
  double radial_velocity = 0;  // m/s, positive = closing
  cd amplitude{1.0, 0.0};      // complex gain alpha_k (absolute units)

  double range() const;
  Direction direction() const { return direction_of(position); }
};

enum class InterfererWaveform { WidebandNoise, NarrowbandTone };

std::string_view to_string(InterfererWaveform w);
InterfererWaveform interferer_waveform_from_string(std::string_view s);

/// Direct-path continuous emitter. Does not carry the radar chirp.
struct InterfererSpec {
  Direction direction;
  double power = 1.0;  // per-element power relative to the noise floor (linear)
  InterfererWaveform waveform = InterfererWaveform::WidebandNoise;
  double bandwidth_fraction = 1.0;  // occupied fraction of f_s (noise only)
  double offset_freq = 0.0;         // baseband center (noise) or tone frequency, Hz
};

struct Scenario {
  std::vector<TargetSpec> targets;
  std::vector<InterfererSpec> interferers;
  double noise_power = 1.0;  // sigma^2 per element
  std::uint64_t seed = 0;
  std::string label;
};

/// Raw received IQ for one CPI. Logical index order is
/// (antenna, fast-time sample, pulse); storage keeps each (antenna, pulse)
/// fast-time record contiguous, antenna-major.
class DataCube {
 public:
  DataCube() = default;
  DataCube(ArrayGeometry geometry, ChirpParams chirp);

  const ArrayGeometry& geometry() const { return geometry_; }
  const ChirpParams& chirp() const { return chirp_; }

  int antennas() const { return geometry_.size(); }
  int samples() const { return chirp_.pulse_samples; }
  int pulses() const { return chirp_.num_pulses; }

  cd& at(int antenna, int sample, int pulse) { return data_[offset(antenna, pulse) + sample]; }
  cd at(int antenna, int sample, int pulse) const {
    return data_[offset(antenna, pulse) + sample];
  }

  std::span<cd> record(int antenna, int pulse) {
    return {data_.data() + offset(antenna, pulse), static_cast<std::size_t>(samples())};
  }
  std::span<const cd> record(int antenna, int pulse) const {
    return {data_.data() + offset(antenna, pulse), static_cast<std::size_t>(samples())};
  }

  std::span<cd> data() { return data_; }
  std::span<const cd> data() const { return data_; }

 private:
  std::size_t offset(int antenna, int pulse) const {
    return (static_cast<std::size_t>(antenna) * pulses() + pulse) * samples();
  }

  ArrayGeometry geometry_;
  ChirpParams chirp_;
  std::vector<cd> data_;
};

/// Integer round-trip delay of a target in fast-time samples.
int target_delay_samples(const TargetSpec& t, const ChirpParams& cp);

/// Ground-truth grid cell of a target: range bin and signed Doppler bin
/// (positive = closing) before any FFT shift.
struct TargetTruth {
  int range_bin = 0;
  int doppler_bin = 0;
};
TargetTruth target_truth(const TargetSpec& t, const ChirpParams& cp);

/// Synthesize the received cube: target echoes (integer circular delay,
/// instantaneous-frequency steering, per-pulse Doppler phase), interferers
/// and circular white Gaussian noise. Deterministic in scenario.seed.
DataCube synthesize_datacube(const Scenario& sc, const ArrayGeometry& geom, const ChirpParams& cp);

/// Static layout constants of the preset scene.
struct PresetGeometry {
  static constexpr double kPlatformAltitude = 7000.0;    // m
  static constexpr double kGroundReference = 18000.0;    // m in front of the array
  static constexpr double kPlatformSpeed = 90.0;         // m/s along +x
  static constexpr int kNumTargets = 20;
  /// Depression angle of the ground reference point (negative elevation).
  static double ground_elevation();
};

struct PresetOptions {
  double snr_db = 0.0;  // per-element target SNR before pulse compression
  double noise_power = 1.0;
  /// Weakest-interferer INR of the A presets, dB. Each later letter adds
  /// inr_step_db; within a preset the interferers spread over +20 dB.
  double inr_db = 60.0;
  double inr_step_db = 5.0;
};

/// Synthetic analogs of the evaluation scenes: A1..E2 and "noninterferer".
/// Letter selects the interferer count (A=2, B=4, C=8, D=12, E=16), digit the
/// target geometry (1 = easy, elevation 25..50 deg above the ground
/// reference direction; 2 = difficult, 12.5..20 deg). Target ranges and
/// velocities are laid on the grid of `cp` so any radio setting works.
Scenario scenario_preset(std::string_view name, std::uint64_t seed, const ChirpParams& cp = {},
                         const PresetOptions& opts = {});

std::vector<std::string> preset_names();

/// Interferer count for a preset letter.
int preset_interferer_count(char letter);

}  // namespace bsmvdr
