#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsmvdr/config.hpp"
#include "bsmvdr/cube_io.hpp"
#include "bsmvdr/pipeline.hpp"
#include "bsmvdr/report.hpp"

using namespace bsmvdr;

namespace {

/// Error raised by the CLI itself, tagged like pipeline errors.
struct CliError : std::runtime_error {
  CliError(std::string s, const std::string& what) : std::runtime_error(what), stage(std::move(s)) {}
  std::string stage;
};

/// Command-line overrides of PipelineConfig. Unset fields keep the value
/// coming from defaults or --config.
struct Overrides {
  std::string config_file;
  std::optional<std::string> scenario, method, fft, window, training, cfar_floor, output_dir;
  std::optional<int> subbands, cfar_guard, cfar_window, gate_range, gate_velocity, threads;
  std::optional<int> n_z, n_x, pulse_samples, num_pulses;
  std::optional<double> loading, cfar_threshold, snr_db, inr_db, inr_step_db, spacing, design_freq;
  std::optional<double> carrier_freq, sample_rate, bandwidth, pri;
  std::optional<std::uint64_t> seed;
  std::optional<bool> recenter;
  bool write_maps = false;
  bool write_patterns = false;
  bool dump_config = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "YAML config/scenario file")->check(CLI::ExistingFile);
    app->add_option("--scenario", scenario, "Preset name (A1..E2, noninterferer)");
    app->add_option("--method", method, "antenna-mvdr | beamspace-mvdr | conventional");
    app->add_option("--subbands", subbands, "Number of subbands L");
    app->add_option("--fft", fft, "Beamspace FFT size m_z x m_x, e.g. 4x32");
    app->add_option("--window", window, "Beamspace window w_z x w_x, e.g. 2x4");
    app->add_option("--loading", loading, "Diagonal loading factor (times trace/dim)");
    app->add_option("--training", training, "Training policy: pulses:K, snapshots:K or rmb");
    app->add_option("--cfar-threshold", cfar_threshold, "CFAR threshold above the floor, dB");
    app->add_option("--cfar-guard", cfar_guard, "CFAR guard cells per side");
    app->add_option("--cfar-floor", cfar_floor, "CFAR floor estimator: median | mean");
    app->add_option("--cfar-window", cfar_window, "CFAR reference cells per side (0 = whole column)");
    app->add_option("--gate-range", gate_range, "Scoring gate, range bins");
    app->add_option("--gate-velocity", gate_velocity, "Scoring gate, velocity bins");
    app->add_option("--output-dir", output_dir, "Directory for reports and artifacts");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--snr-db", snr_db, "Preset per-element target SNR, dB");
    app->add_option("--inr-db", inr_db, "Preset weakest-interferer INR of the A scenes, dB");
    app->add_option("--inr-step-db", inr_step_db, "Preset INR increase per scenario letter, dB");
    app->add_option("--n-z", n_z, "Array rows");
    app->add_option("--n-x", n_x, "Array columns");
    app->add_option("--spacing", spacing, "Element spacing, m (default half wavelength)");
    app->add_option("--design-freq", design_freq, "Array design frequency, Hz");
    app->add_option("--carrier-freq", carrier_freq, "Carrier frequency, Hz");
    app->add_option("--sample-rate", sample_rate, "Sample rate, Hz");
    app->add_option("--bandwidth", bandwidth, "Chirp bandwidth, Hz");
    app->add_option("--pulse-samples", pulse_samples, "Fast-time samples per pulse");
    app->add_option("--num-pulses", num_pulses, "Pulses per CPI");
    app->add_option("--pri", pri, "Pulse repetition interval, s");
    app->add_option("--recenter", recenter, "Recenter windows per subband (true/false)");
    app->add_option("--threads", threads, "Worker threads");
    app->add_flag("--write-maps", write_maps, "Write range-Doppler maps");
    app->add_flag("--write-patterns", write_patterns, "Write beam patterns");
    app->add_flag("--dump-config", dump_config, "Print the effective config as YAML and exit");
  }

  PipelineConfig build() const {
    PipelineConfig cfg;
    if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
    if (scenario) {
      cfg.scenario = *scenario;
      cfg.custom_scenario.reset();
    }
    if (method) cfg.method = method_from_string(*method);
    if (subbands) cfg.num_subbands = *subbands;
    if (fft) std::tie(cfg.plan.m_z, cfg.plan.m_x) = parse_dims(*fft);
    if (window) std::tie(cfg.w_z, cfg.w_x) = parse_dims(*window);
    if (loading) cfg.loading = *loading;
    if (training) cfg.training = TrainingPolicy::parse(*training);
    if (cfar_threshold) cfg.cfar.threshold_db = *cfar_threshold;
    if (cfar_guard) cfg.cfar.guard = *cfar_guard;
    if (cfar_window) cfg.cfar.window = *cfar_window;
    if (cfar_floor) {
      if (*cfar_floor == "median") {
        cfg.cfar.floor = FloorEstimator::Median;
      } else if (*cfar_floor == "mean") {
        cfg.cfar.floor = FloorEstimator::Mean;
      } else {
        throw ConfigError("cfar-floor: expected median or mean, got '" + *cfar_floor + "'");
      }
    }
    if (gate_range) cfg.gate.range_bins = *gate_range;
    if (gate_velocity) cfg.gate.velocity_bins = *gate_velocity;
    if (output_dir) cfg.output_dir = *output_dir;
    if (seed) {
      cfg.seed = *seed;
      if (cfg.custom_scenario) cfg.custom_scenario->seed = *seed;
    }
    if (snr_db) cfg.snr_db = *snr_db;
    if (inr_db) cfg.inr_db = *inr_db;
    if (inr_step_db) cfg.inr_step_db = *inr_step_db;
    if (n_z) cfg.geometry.n_z = *n_z;
    if (n_x) cfg.geometry.n_x = *n_x;
    if (design_freq) {
      cfg.geometry.design_freq = *design_freq;
      if (!spacing) cfg.geometry.spacing = 0.5 * kSpeedOfLight / *design_freq;
    }
    if (spacing) cfg.geometry.spacing = *spacing;
    if (carrier_freq) cfg.chirp.carrier_freq = *carrier_freq;
    if (sample_rate) cfg.chirp.sample_rate = *sample_rate;
    if (bandwidth) cfg.chirp.bandwidth = *bandwidth;
    if (pulse_samples) cfg.chirp.pulse_samples = *pulse_samples;
    if (num_pulses) cfg.chirp.num_pulses = *num_pulses;
    if (pri) cfg.chirp.pri = *pri;
    if (recenter) cfg.recenter_per_subband = *recenter;
    if (threads) cfg.threads = *threads;
    if (write_maps) cfg.write_maps = true;
    if (write_patterns) cfg.write_patterns = true;
    return cfg;
  }
};

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw CliError("io", "cannot open '" + path + "' for writing");
  return file;
}

void print_truth(const Scenario& sc, const ChirpParams& cp) {
  std::fprintf(stderr, "scenario %s: %zu targets, %zu interferers\n", sc.label.c_str(), sc.targets.size(),
               sc.interferers.size());
  for (std::size_t k = 0; k < sc.targets.size(); ++k) {
    const TargetSpec& t = sc.targets[k];
    const Direction d = t.direction();
    const TargetTruth tt = target_truth(t, cp);
    std::fprintf(stderr, "  target %2zu  az %7.2f  el %7.2f  range %8.2f m  v %7.2f m/s  bins (%d, %d)\n", k,
                 rad_to_deg(d.azimuth), rad_to_deg(d.elevation), t.range(), t.radial_velocity, tt.range_bin,
                 tt.doppler_bin);
  }
}

int cmd_simulate(const PipelineConfig& cfg, const std::string& out) {
  cfg.validate();
  const Scenario sc = resolve_scenario(cfg);
  print_truth(sc, cfg.chirp);
  const DataCube cube = synthesize_datacube(sc, cfg.geometry, cfg.chirp);
  try {
    write_cube(out, cube);
  } catch (const std::exception& e) {
    throw CliError("io", e.what());
  }
  std::fprintf(stderr, "wrote %s (%d antennas x %d pulses x %d samples)\n", out.c_str(), cube.antennas(),
               cube.pulses(), cube.samples());
  return 0;
}

int cmd_run(const PipelineConfig& cfg, const std::string& cube_path) {
  cfg.validate();
  PipelineResult result;
  if (!cube_path.empty()) {
    DataCube cube;
    try {
      cube = read_cube(cube_path);
    } catch (const std::exception& e) {
      throw CliError("io", e.what());
    }
    PipelineSession session(resolve_scenario(cfg), std::move(cube));
    result = run_pipeline(session, cfg);
  } else {
    result = run_pipeline(cfg);
  }
  write_detection_report(std::cout, result.records);
  std::fprintf(stderr, "detected %d/%zu targets; %llu complex multiplies\n", result.detected_count(),
               result.scores.size(), static_cast<unsigned long long>(result.complexity.total()));
  for (const std::string& a : result.artifacts) std::fprintf(stderr, "wrote %s\n", a.c_str());
  return 0;
}

int cmd_sweep(const PipelineConfig& cfg, const std::string& axis, const std::vector<std::string>& values,
              const std::string& out) {
  const SweepAxis ax = sweep_axis_from_string(axis);
  const SweepResult r = sweep(cfg, ax, values);
  std::ofstream file;
  write_sweep_report(open_or_stdout(out, file), r);
  for (const SweepFailure& f : r.failures) std::fprintf(stderr, "[sweep] cell %s failed: %s\n", f.cell.c_str(), f.message.c_str());
  return 0;
}

struct PatternArgs {
  int target = 0;
  int subband = -1;
  std::vector<double> az{-80, 80, 161};
  std::vector<double> el{-60, 60, 121};
  std::string out;
};

int cmd_beampattern(const PipelineConfig& cfg, const PatternArgs& args) {
  cfg.validate();
  if (args.az.size() != 3 || args.el.size() != 3) throw ConfigError("grid: expected min max count");
  PipelineSession session(resolve_scenario(cfg), cfg.geometry, cfg.chirp);
  const int K = static_cast<int>(session.scenario().targets.size());
  if (args.target < 0 || args.target >= K) {
    throw ConfigError("target: index " + std::to_string(args.target) + " outside [0, " + std::to_string(K) + ")");
  }
  BeamformOptions opts = BeamformOptions::from(cfg);
  opts.capture_subband = args.subband < 0 ? cfg.num_subbands / 2 : args.subband;
  if (opts.capture_subband >= cfg.num_subbands) throw ConfigError("subband: index out of range");
  const BeamformResult bf = session.beamform(opts);
  const AngleGrid grid = AngleGrid::uniform_degrees(args.az[0], args.az[1], static_cast<int>(args.az[2]), args.el[0],
                                                    args.el[1], static_cast<int>(args.el[2]));
  const double f = subband_frequency(opts.capture_subband, cfg.num_subbands, cfg.chirp);
  const Eigen::MatrixXd pat = beam_pattern(bf.captured[args.target], grid, cfg.geometry, f);
  std::ofstream file;
  write_beam_pattern_csv(open_or_stdout(args.out, file), pat, grid);
  return 0;
}

int cmd_bench(const PipelineConfig& cfg, int repeats, bool pipeline) {
  std::printf("method,antennas,dim,n_t,covariance,factorization,solve,steering,training,"
              "front_end_per_snapshot,application_per_snapshot,train_ms\n");
  for (Method m : {Method::AntennaMvdr, Method::BeamspaceMvdr, Method::Conventional}) {
    PipelineConfig c = cfg;
    c.method = m;
    UnitComplexity u;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) u = complexity_count(c);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / std::max(repeats, 1);
    std::printf("%s,%d,%d,%d,%llu,%llu,%llu,%llu,%llu,%llu,%llu,%.3f\n", std::string(to_string(m)).c_str(),
                u.antennas, u.dim, u.n_t, static_cast<unsigned long long>(u.covariance),
                static_cast<unsigned long long>(u.factorization), static_cast<unsigned long long>(u.solve),
                static_cast<unsigned long long>(u.steering), static_cast<unsigned long long>(u.training()),
                static_cast<unsigned long long>(u.front_end_per_snapshot),
                static_cast<unsigned long long>(u.application_per_snapshot), ms);
  }
  if (pipeline) {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineResult r = run_pipeline(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    std::fprintf(stderr, "pipeline %s: %.1f s, detected %d/%zu\n", std::string(to_string(cfg.method)).c_str(),
                 std::chrono::duration<double>(t1 - t0).count(), r.detected_count(), r.scores.size());
    write_complexity_csv(std::cout, r.complexity);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Windowed beamspace MVDR for wideband planar-array radar"};
  app.require_subcommand(1);

  Overrides sim_o, run_o, sweep_o, pat_o, bench_o;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Synthesize a data cube and write it to disk");
  sim_o.attach(sim);
  sim->add_option("--out", sim_out, "Output cube file")->required();

  std::string run_cube;
  auto* run = app.add_subcommand("run", "Run the detection pipeline and print the report");
  run_o.attach(run);
  run->add_option("--cube", run_cube, "Use a stored cube instead of simulating")->check(CLI::ExistingFile);

  std::string axis = "window";
  std::vector<std::string> values;
  std::string sweep_out;
  auto* sw = app.add_subcommand("sweep", "Run the pipeline along one axis and aggregate reports");
  sweep_o.attach(sw);
  sw->add_option("--axis", axis, "window | fft-size | scenario");
  sw->add_option("--values", values, "Axis values, e.g. 2x4,4x4,4x8")->delimiter(',');
  sw->add_option("--out", sweep_out, "Output CSV (default stdout)");

  PatternArgs pargs;
  auto* pat = app.add_subcommand("beampattern", "Evaluate the beam pattern of one target's correlator");
  pat_o.attach(pat);
  pat->add_option("--target", pargs.target, "Target index");
  pat->add_option("--subband", pargs.subband, "Subband storage index (default L/2)");
  pat->add_option("--az", pargs.az, "Azimuth grid: min max count (deg)")->expected(3);
  pat->add_option("--el", pargs.el, "Elevation grid: min max count (deg)")->expected(3);
  pat->add_option("--out", pargs.out, "Output CSV (default stdout)");

  int repeats = 3;
  bool bench_pipeline = false;
  auto* bench = app.add_subcommand("bench", "Complexity tallies and wall-clock timings");
  bench_o.attach(bench);
  bench->add_option("--repeats", repeats, "Timing repetitions");
  bench->add_flag("--pipeline", bench_pipeline, "Also time a full pipeline run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "[cli] %s\n", e.what());
    return 2;
  }

  std::string stage = "config";
  try {
    auto build = [&](const Overrides& o) {
      PipelineConfig cfg = o.build();
      if (o.dump_config) {
        std::cout << dump_config_yaml(cfg);
        std::exit(0);
      }
      stage = "run";
      return cfg;
    };
    if (sim->parsed()) return cmd_simulate(build(sim_o), sim_out);
    if (run->parsed()) return cmd_run(build(run_o), run_cube);
    if (sw->parsed()) return cmd_sweep(build(sweep_o), axis, values, sweep_out);
    if (pat->parsed()) return cmd_beampattern(build(pat_o), pargs);
    if (bench->parsed()) return cmd_bench(build(bench_o), repeats, bench_pipeline);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "[config] %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "[config] %s\n", e.what());
    return 2;
  } catch (const PipelineError& e) {
    std::fprintf(stderr, "[%s] %s\n", e.stage().c_str(), e.what() + e.stage().size() + 2);
    return 3;
  } catch (const CliError& e) {
    std::fprintf(stderr, "[%s] %s\n", e.stage.c_str(), e.what());
    return 4;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "[numerical] %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[%s] %s\n", stage.c_str(), e.what());
    return 1;
  }
  return 1;
}
