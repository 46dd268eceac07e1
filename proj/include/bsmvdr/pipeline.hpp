#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bsmvdr/array_geometry.hpp"
#include "bsmvdr/beamspace.hpp"
#include "bsmvdr/channelizer.hpp"
#include "bsmvdr/detection.hpp"
#include "bsmvdr/mvdr.hpp"
#include "bsmvdr/scene.hpp"

namespace bsmvdr {

enum class Method { AntennaMvdr, BeamspaceMvdr, Conventional };

/// Run-time failure tagged with the pipeline stage that raised it.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// How many snapshots of each subband train the covariance. Training always
/// uses the leading snapshots in pulse order.
///   pulses:K     the first K pulses (K * snapshots per pulse)
///   snapshots:K  the first K snapshots
///   rmb          2 * dim snapshots, dim being the adaptive dimension
struct TrainingPolicy {
  enum class Kind { Pulses, Snapshots, Rmb };
  Kind kind = Kind::Pulses;
  int value = 8;

  /// n_t for an adaptive problem of size `dim`. Throws ConfigError when
  /// the subband does not hold enough snapshots.
  int snapshots(int dim, int snapshots_per_pulse, int pulses) const;
  std::string to_string() const;
  static TrainingPolicy parse(std::string_view s);
};

struct PipelineConfig {
  std::string scenario = "A1";          // preset name
  std::optional<Scenario> custom_scenario;  // overrides the preset when set
  Method method = Method::BeamspaceMvdr;
  int num_subbands = 128;
  BeamspacePlan plan{4, 32};
  int w_z = 2;
  int w_x = 4;
  double loading = 1e-3;
  TrainingPolicy training;
  CfarParams cfar;
  Gate gate;
  std::string output_dir;  // empty: no files written
  std::uint64_t seed = 1;
  double snr_db = 0.0;  // preset target SNR per element
  double inr_db = PresetOptions{}.inr_db;  // preset A-level weakest-interferer INR
  double inr_step_db = PresetOptions{}.inr_step_db;  // INR increase per preset letter
  ArrayGeometry geometry = ArrayGeometry::half_wavelength(4, 32, 10e9);
  ChirpParams chirp;
  bool recenter_per_subband = true;  // window center from each subband frequency
  int threads = 1;
  bool write_maps = false;
  bool write_patterns = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// The scenario a config refers to.
Scenario resolve_scenario(const PipelineConfig& cfg);

/// Complex-multiply tallies of one pipeline run, by stage. Shared front-end
/// work (channelizer, beamspace FFT, antenna covariance) is counted once.
struct ComplexityReport {
  std::uint64_t channelize = 0;
  std::uint64_t front_end = 0;  // beamspace transform of every snapshot
  std::uint64_t covariance = 0;
  std::uint64_t factorization = 0;
  std::uint64_t solve = 0;
  std::uint64_t steering = 0;  // windowed steering vectors
  std::uint64_t application = 0;
  std::uint64_t synthesis = 0;
  std::uint64_t range_doppler = 0;

  std::uint64_t training() const { return covariance + factorization + solve + steering; }
  std::uint64_t total() const {
    return channelize + front_end + training() + application + synthesis + range_doppler;
  }
  ComplexityReport& operator+=(const ComplexityReport& o);
};

/// Tallies of a single (target, subband) work unit.
struct UnitComplexity {
  Method method = Method::AntennaMvdr;
  int antennas = 0;
  int dim = 0;  // adaptive dimension: N, or W for beamspace
  int n_t = 0;
  std::uint64_t covariance = 0;
  std::uint64_t factorization = 0;
  std::uint64_t solve = 0;
  std::uint64_t steering = 0;
  std::uint64_t front_end_per_snapshot = 0;  // shared beamspace FFT
  std::uint64_t application_per_snapshot = 0;

  std::uint64_t training() const { return covariance + factorization + solve + steering; }
  std::uint64_t per_snapshot() const { return front_end_per_snapshot + application_per_snapshot; }
};

/// Runs the instrumented kernels of one work unit on synthetic snapshots
/// with the sizes of `cfg` (geometry, plan, window, training policy).
UnitComplexity complexity_count(const PipelineConfig& cfg);

struct BeamformOptions {
  Method method = Method::BeamspaceMvdr;
  int num_subbands = 128;
  BeamspacePlan plan{4, 32};
  int w_z = 2;
  int w_x = 4;
  double loading = 1e-3;
  TrainingPolicy training;
  bool recenter_per_subband = true;
  int threads = 1;
  /// Storage index of a subband whose antenna-space correlators are kept; -1 keeps none.
  int capture_subband = -1;

  static BeamformOptions from(const PipelineConfig& cfg);
};

struct BeamformResult {
  std::vector<SubbandSeries> outputs;  // one per target
  std::vector<Correlator> captured;    // antenna space, one per target
  ComplexityReport complexity;
};

/// A simulated scene with its cube and cached channelizations, so several
/// beamformer settings can run on identical data.
class PipelineSession {
 public:
  PipelineSession(Scenario scenario, const ArrayGeometry& geom, const ChirpParams& cp);
  PipelineSession(Scenario scenario, DataCube cube);

  const Scenario& scenario() const { return scenario_; }
  const DataCube& cube() const { return cube_; }
  const ArrayGeometry& geometry() const { return cube_.geometry(); }
  const ChirpParams& chirp() const { return cube_.chirp(); }

  /// Channelized cube for L subbands; computed on first use. `counter`
  /// receives the channelizer tally only when the cube is built.
  const SubbandCube& channelized(int num_subbands, OpCounter* counter = nullptr);
  void release_channelized() { channelized_.clear(); }

  /// Per-target beamformer outputs in the subband domain.
  BeamformResult beamform(const BeamformOptions& opts);

 private:
  Scenario scenario_;
  DataCube cube_;
  std::map<int, SubbandCube> channelized_;
};

/// One line of the detection report.
struct DetectionRecord {
  std::string scenario;
  int target_id = 0;
  Method method = Method::AntennaMvdr;
  int w_z = 0;
  int w_x = 0;
  int m_z = 0;
  int m_x = 0;
  DetectionScore score;
};

struct PipelineResult {
  std::vector<DetectionScore> scores;
  std::vector<DetectionRecord> records;
  ComplexityReport complexity;
  std::vector<std::string> artifacts;

  int detected_count() const;
};

/// Full chain: simulate, channelize, beamform, synthesize, range-Doppler,
/// CFAR and score.
PipelineResult run_pipeline(const PipelineConfig& cfg);
/// Same on an existing session (the cube is not re-simulated).
PipelineResult run_pipeline(PipelineSession& session, const PipelineConfig& cfg);

enum class SweepAxis { Window, FftSize, Scenario };
SweepAxis sweep_axis_from_string(std::string_view s);

struct SweepFailure {
  std::string cell;
  std::string message;
};

struct SweepResult {
  std::vector<DetectionRecord> records;
  std::vector<SweepFailure> failures;
};

/// Runs the pipeline at every value of one axis. Values are "ZxX" pairs
/// for window and fft-size, preset names for scenario. A failing cell is
/// recorded and the sweep continues.
SweepResult sweep(const PipelineConfig& base, SweepAxis axis, const std::vector<std::string>& values);

/// Parses "4x8" into (4, 8); throws ConfigError.
std::pair<int, int> parse_dims(std::string_view s);

/// Runs fn(i, worker) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int index, int worker)>& fn);

}  // namespace bsmvdr
