#include "bsmvdr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "bsmvdr/cube_io.hpp"
#include "bsmvdr/report.hpp"

namespace bsmvdr {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::AntennaMvdr:
      return "antenna-mvdr";
    case Method::BeamspaceMvdr:
      return "beamspace-mvdr";
    case Method::Conventional:
      return "conventional";
  }
  return "unknown";
}

Method method_from_string(std::string_view s) {
  if (s == "antenna-mvdr") return Method::AntennaMvdr;
  if (s == "beamspace-mvdr") return Method::BeamspaceMvdr;
  if (s == "conventional") return Method::Conventional;
  throw ConfigError("method: unknown value '" + std::string(s) +
                    "' (expected antenna-mvdr, beamspace-mvdr or conventional)");
}

int TrainingPolicy::snapshots(int dim, int snapshots_per_pulse, int pulses) const {
  const int total = snapshots_per_pulse * pulses;
  int n = 0;
  switch (kind) {
    case Kind::Pulses:
      if (value < 1 || value > pulses) {
        throw ConfigError("training: pulses:" + std::to_string(value) + " outside [1, " +
                          std::to_string(pulses) + "]");
      }
      n = value * snapshots_per_pulse;
      break;
    case Kind::Snapshots:
      n = value;
      break;
    case Kind::Rmb:
      n = 2 * dim;
      break;
  }
  if (n < 1 || n > total) {
    throw ConfigError("training: " + to_string() + " asks for " + std::to_string(n) +
                      " snapshots but a subband holds " + std::to_string(total));
  }
  return n;
}

std::string TrainingPolicy::to_string() const {
  switch (kind) {
    case Kind::Pulses:
      return "pulses:" + std::to_string(value);
    case Kind::Snapshots:
      return "snapshots:" + std::to_string(value);
    case Kind::Rmb:
      return "rmb";
  }
  return "?";
}

TrainingPolicy TrainingPolicy::parse(std::string_view s) {
  TrainingPolicy p;
  if (s == "rmb") {
    p.kind = Kind::Rmb;
    p.value = 0;
    return p;
  }
  const auto colon = s.find(':');
  const std::string_view kind = s.substr(0, colon);
  if (colon == std::string_view::npos || (kind != "pulses" && kind != "snapshots")) {
    throw ConfigError("training: expected pulses:K, snapshots:K or rmb, got '" + std::string(s) + "'");
  }
  const std::string num(s.substr(colon + 1));
  try {
    std::size_t used = 0;
    p.value = std::stoi(num, &used);
    if (used != num.size()) throw std::invalid_argument(num);
  } catch (const std::exception&) {
    throw ConfigError("training: bad count '" + num + "'");
  }
  p.kind = kind == "pulses" ? Kind::Pulses : Kind::Snapshots;
  return p;
}

std::pair<int, int> parse_dims(std::string_view s) {
  const auto x = s.find('x');
  if (x == std::string_view::npos) throw ConfigError("expected ZxX dimensions, got '" + std::string(s) + "'");
  try {
    std::size_t u1 = 0;
    std::size_t u2 = 0;
    const std::string a(s.substr(0, x));
    const std::string b(s.substr(x + 1));
    const int z = std::stoi(a, &u1);
    const int w = std::stoi(b, &u2);
    if (u1 != a.size() || u2 != b.size() || z < 1 || w < 1) throw std::invalid_argument(std::string(s));
    return {z, w};
  } catch (const std::exception&) {
    throw ConfigError("expected ZxX dimensions, got '" + std::string(s) + "'");
  }
}

void PipelineConfig::validate() const {
  auto wrap = [](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw ConfigError(std::string(field) + ": " + e.what());
    }
  };
  wrap("geometry", [&] { geometry.validate(); });
  wrap("chirp", [&] { chirp.validate(); });
  if (!custom_scenario) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), scenario) == names.end()) {
      throw ConfigError("scenario: unknown preset '" + scenario + "'");
    }
  }
  wrap("subbands", [&] { validate_subband_count(chirp.pulse_samples, num_subbands); });
  if (method == Method::BeamspaceMvdr) {
    wrap("fft", [&] { plan.validate(geometry); });
    if (w_z < 1 || w_z > plan.m_z || w_x < 1 || w_x > plan.m_x) {
      throw ConfigError("window: " + std::to_string(w_z) + "x" + std::to_string(w_x) +
                        " must lie within the FFT size " + std::to_string(plan.m_z) + "x" +
                        std::to_string(plan.m_x));
    }
  }
  if (!(loading >= 0) || !std::isfinite(loading)) throw ConfigError("loading: must be a finite value >= 0");
  if (method != Method::Conventional) {
    const int dim = method == Method::AntennaMvdr ? geometry.size() : w_z * w_x;
    const int n_t = [&] {
      try {
        return training.snapshots(dim, chirp.pulse_samples / num_subbands, chirp.num_pulses);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what());
      }
    }();
    if (loading == 0 && n_t < dim) {
      throw ConfigError("training: " + std::to_string(n_t) + " snapshots for dimension " +
                        std::to_string(dim) + " give a singular covariance without loading");
    }
  }
  if (!std::isfinite(cfar.threshold_db)) throw ConfigError("cfar.threshold_db: must be finite");
  if (cfar.guard < 0) throw ConfigError("cfar.guard: must be >= 0");
  if (cfar.window < 0) throw ConfigError("cfar.window: must be >= 0");
  if (gate.range_bins < 0 || gate.velocity_bins < 0) throw ConfigError("gate: bins must be >= 0");
  if (threads < 1) throw ConfigError("threads: must be >= 1");
}

Scenario resolve_scenario(const PipelineConfig& cfg) {
  if (cfg.custom_scenario) return *cfg.custom_scenario;
  PresetOptions opts;
  opts.snr_db = cfg.snr_db;
  opts.inr_db = cfg.inr_db;
  opts.inr_step_db = cfg.inr_step_db;
  return scenario_preset(cfg.scenario, cfg.seed, cfg.chirp, opts);
}

ComplexityReport& ComplexityReport::operator+=(const ComplexityReport& o) {
  channelize += o.channelize;
  front_end += o.front_end;
  covariance += o.covariance;
  factorization += o.factorization;
  solve += o.solve;
  steering += o.steering;
  application += o.application;
  synthesis += o.synthesis;
  range_doppler += o.range_doppler;
  return *this;
}

void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
  const int workers = std::min(std::max(threads, 1), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

Eigen::MatrixXcd random_snapshots(int dim, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd y(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) y(i, j) = {g(rng), g(rng)};
  }
  return y;
}

}  // namespace

UnitComplexity complexity_count(const PipelineConfig& cfg) {
  cfg.validate();
  const ArrayGeometry& geom = cfg.geometry;
  const int N = geom.size();
  const int spp = cfg.chirp.pulse_samples / cfg.num_subbands;
  const double f = cfg.chirp.carrier_freq;
  const SteeringVector a = steering_vector(spatial_frequencies({0.1, 0.05}, f, geom), geom);

  UnitComplexity u;
  u.method = cfg.method;
  u.antennas = N;
  OpCounter c;
  auto take = [&c] {
    const std::uint64_t v = c.complex_mults;
    c.complex_mults = 0;
    return v;
  };

  if (cfg.method == Method::Conventional) {
    u.dim = N;
    const Correlator w = conventional_correlator(a);
    apply_correlator(w, random_snapshots(N, 1, cfg.seed), &c);
    u.application_per_snapshot = take();
    return u;
  }

  if (cfg.method == Method::AntennaMvdr) {
    u.dim = N;
    u.n_t = cfg.training.snapshots(N, spp, cfg.chirp.num_pulses);
    const Eigen::MatrixXcd y = random_snapshots(N, u.n_t, cfg.seed);
    const CovarianceEstimate R = estimate_covariance(y, cfg.loading, &c);
    u.covariance = take();
    const HermitianFactor F = HermitianFactor::factor(R.matrix, &c);
    u.factorization = take();
    const Correlator w = mvdr_correlator(F, a, &c);
    u.solve = take();
    apply_correlator(w, y.leftCols(1), &c);
    u.application_per_snapshot = take();
    return u;
  }

  const BeamspaceTransform T(geom, cfg.plan);
  WindowSpec win{cfg.w_z, cfg.w_x, 0, 0};
  std::tie(win.center_row, win.center_col) = window_center(spatial_frequencies({0.1, 0.05}, f, geom), cfg.plan);
  u.dim = win.size();
  u.n_t = cfg.training.snapshots(u.dim, spp, cfg.chirp.num_pulses);
  const Eigen::MatrixXcd y = random_snapshots(N, u.n_t, cfg.seed);
  Eigen::MatrixXcd z(u.dim, u.n_t);
  for (int j = 0; j < u.n_t; ++j) {
    const Eigen::VectorXcd beam = T.forward(Eigen::VectorXcd(y.col(j)), j == 0 ? &c : nullptr);
    z.col(j) = extract_window(beam, cfg.plan, win);
  }
  u.front_end_per_snapshot = take();
  const CovarianceEstimate R = estimate_covariance(z, cfg.loading, &c);
  u.covariance = take();
  const HermitianFactor F = HermitianFactor::factor(R.matrix, &c);
  u.factorization = take();
  const Eigen::VectorXcd at = windowed_steering(a, T, win, &c);
  u.steering = take();
  const Correlator w = mvdr_correlator(F, at, &c);
  u.solve = take();
  apply_correlator(w, z.leftCols(1), &c);
  u.application_per_snapshot = take();
  return u;
}

BeamformOptions BeamformOptions::from(const PipelineConfig& cfg) {
  BeamformOptions o;
  o.method = cfg.method;
  o.num_subbands = cfg.num_subbands;
  o.plan = cfg.plan;
  o.w_z = cfg.w_z;
  o.w_x = cfg.w_x;
  o.loading = cfg.loading;
  o.training = cfg.training;
  o.recenter_per_subband = cfg.recenter_per_subband;
  o.threads = cfg.threads;
  return o;
}

PipelineSession::PipelineSession(Scenario scenario, const ArrayGeometry& geom, const ChirpParams& cp)
    : scenario_(std::move(scenario)) {
  try {
    cube_ = synthesize_datacube(scenario_, geom, cp);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("simulate", e.what());
  }
}

PipelineSession::PipelineSession(Scenario scenario, DataCube cube)
    : scenario_(std::move(scenario)), cube_(std::move(cube)) {}

const SubbandCube& PipelineSession::channelized(int num_subbands, OpCounter* counter) {
  auto it = channelized_.find(num_subbands);
  if (it == channelized_.end()) {
    try {
      it = channelized_.emplace(num_subbands, channelize(cube_, num_subbands, counter)).first;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError("channelize", e.what());
    }
  }
  return it->second;
}

BeamformResult PipelineSession::beamform(const BeamformOptions& opts) {
  const ArrayGeometry& geom = geometry();
  const ChirpParams& cp = chirp();
  const int L = opts.num_subbands;
  const int K = static_cast<int>(scenario_.targets.size());
  const int N = geom.size();

  BeamformResult result;
  OpCounter chan;
  const SubbandCube& sub = channelized(L, &chan);
  result.complexity.channelize = chan.complex_mults;
  const int T = sub.snapshots();
  const int P = sub.pulses();
  const int cols = sub.snapshots_per_subband();

  std::vector<Direction> dirs;
  for (const TargetSpec& t : scenario_.targets) dirs.push_back(t.direction());
  result.outputs.assign(K, SubbandSeries(L, T, P));
  if (opts.capture_subband >= 0) result.captured.resize(K);

  std::optional<BeamspaceTransform> transform;
  if (opts.method == Method::BeamspaceMvdr) transform.emplace(geom, opts.plan);
  const int dim = opts.method == Method::BeamspaceMvdr ? opts.w_z * opts.w_x : N;
  const int n_t = opts.method == Method::Conventional ? 0 : opts.training.snapshots(dim, T, P);

  const int workers = std::max(1, std::min(opts.threads, L));
  std::vector<ComplexityReport> tallies(workers);

  parallel_for(L, workers, [&](int b, int worker) {
    ComplexityReport& tally = tallies[worker];
    std::span<const cd> block = sub.subband(b);
    const Eigen::Map<const Eigen::MatrixXcd> Y(block.data(), N, cols);
    const double f = subband_frequency(b, L, cp);
    const double f_center = opts.recenter_per_subband ? f : cp.carrier_freq;
    OpCounter c;
    auto take = [&c] {
      const std::uint64_t v = c.complex_mults;
      c.complex_mults = 0;
      return v;
    };
    auto store = [&](int k, const Eigen::VectorXcd& out) {
      std::span<cd> dst = result.outputs[k].subband(b);
      std::copy(out.data(), out.data() + out.size(), dst.begin());
    };
    auto stage = [&](const char* name, int k, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        throw PipelineError(name, "target " + std::to_string(k) + ", subband " + std::to_string(b) + ": " +
                                      e.what());
      }
    };

    if (opts.method == Method::Conventional) {
      for (int k = 0; k < K; ++k) {
        stage("beamform", k, [&] {
          const SteeringVector a = steering_vector(spatial_frequencies(dirs[k], f, geom), geom);
          Correlator w = conventional_correlator(a);
          w.target_id = k;
          w.subband = b;
          store(k, apply_correlator(w, Y, &c));
          tally.application += take();
          if (b == opts.capture_subband) result.captured[k] = w;
        });
      }
      return;
    }

    if (opts.method == Method::AntennaMvdr) {
      std::optional<HermitianFactor> F;
      stage("mvdr-train", -1, [&] {
        const CovarianceEstimate R = estimate_covariance(Y.leftCols(n_t), opts.loading, &c);
        tally.covariance += take();
        F.emplace(HermitianFactor::factor(R.matrix, &c));
        tally.factorization += take();
      });
      for (int k = 0; k < K; ++k) {
        stage("mvdr-train", k, [&] {
          const SteeringVector a = steering_vector(spatial_frequencies(dirs[k], f, geom), geom);
          Correlator w = mvdr_correlator(*F, a, &c);
          tally.solve += take();
          w.target_id = k;
          w.subband = b;
          store(k, apply_correlator(w, Y, &c));
          tally.application += take();
          if (b == opts.capture_subband) result.captured[k] = w;
        });
      }
      return;
    }

    const int M = transform->bins();
    Eigen::MatrixXcd Z(M, cols);
    for (int j = 0; j < cols; ++j) {
      transform->forward(std::span<const cd>(Y.col(j).data(), N), std::span<cd>(Z.col(j).data(), M), &c);
    }
    tally.front_end += take();
    for (int k = 0; k < K; ++k) {
      stage("mvdr-train", k, [&] {
        WindowSpec win{opts.w_z, opts.w_x, 0, 0};
        std::tie(win.center_row, win.center_col) =
            window_center(spatial_frequencies(dirs[k], f_center, geom), opts.plan);
        const std::vector<int> idx = window_indices(opts.plan, win);
        Eigen::MatrixXcd Zw(dim, cols);
        for (int i = 0; i < dim; ++i) Zw.row(i) = Z.row(idx[i]);
        const CovarianceEstimate R = estimate_covariance(Zw.leftCols(n_t), opts.loading, &c);
        tally.covariance += take();
        const HermitianFactor F = HermitianFactor::factor(R.matrix, &c);
        tally.factorization += take();
        const SteeringVector a = steering_vector(spatial_frequencies(dirs[k], f, geom), geom);
        const Eigen::VectorXcd at = windowed_steering(a, *transform, win, &c);
        tally.steering += take();
        Correlator w = mvdr_correlator(F, at, &c);
        tally.solve += take();
        w.space = CorrelatorSpace::WindowedBeamspace;
        w.target_id = k;
        w.subband = b;
        store(k, apply_correlator(w, Zw, &c));
        tally.application += take();
        if (b == opts.capture_subband) result.captured[k] = lift_correlator(w, *transform, win);
      });
    }
  });

  for (const ComplexityReport& t : tallies) result.complexity += t;
  return result;
}

int PipelineResult::detected_count() const {
  return static_cast<int>(std::count_if(scores.begin(), scores.end(), [](const DetectionScore& s) {
    return s.detected;
  }));
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineSession session(resolve_scenario(cfg), cfg.geometry, cfg.chirp);
  return run_pipeline(session, cfg);
}

PipelineResult run_pipeline(PipelineSession& session, const PipelineConfig& cfg) {
  cfg.validate();
  const ChirpParams& cp = session.chirp();
  const int L = cfg.num_subbands;
  BeamformOptions opts = BeamformOptions::from(cfg);
  if (cfg.write_patterns) opts.capture_subband = L / 2;
  BeamformResult bf = session.beamform(opts);

  const int K = static_cast<int>(session.scenario().targets.size());
  const std::vector<cd> replica = generate_chirp(cp);
  PipelineResult result;
  result.scores.resize(K);
  std::vector<RangeDopplerMap> maps(cfg.write_maps ? K : 0);
  const int workers = std::max(1, std::min(cfg.threads, std::max(K, 1)));
  std::vector<ComplexityReport> tallies(workers);

  parallel_for(K, workers, [&](int k, int worker) {
    OpCounter syn;
    OpCounter rd;
    WidebandSeries wide;
    try {
      wide = synthesize(bf.outputs[k], &syn);
    } catch (const std::exception& e) {
      throw PipelineError("synthesize", "target " + std::to_string(k) + ": " + e.what());
    }
    bf.outputs[k] = SubbandSeries();
    try {
      RangeDopplerMap map = range_doppler_map(wide, replica, cp, &rd);
      map.target_id = k;
      const std::vector<Detection> dets = cfar_detect(map, cfg.cfar);
      const TruthCell truth = truth_cell(session.scenario().targets[k], k, cp, map);
      result.scores[k] = score_detections(dets, truth, map, cfg.gate);
      if (cfg.write_maps) maps[k] = std::move(map);
    } catch (const std::exception& e) {
      throw PipelineError("detect", "target " + std::to_string(k) + ": " + e.what());
    }
    tallies[worker].synthesis += syn.complex_mults;
    tallies[worker].range_doppler += rd.complex_mults;
  });

  result.complexity = bf.complexity;
  for (const ComplexityReport& t : tallies) result.complexity += t;

  const std::string label = session.scenario().label.empty() ? cfg.scenario : session.scenario().label;
  const bool beamspace = cfg.method == Method::BeamspaceMvdr;
  for (int k = 0; k < K; ++k) {
    DetectionRecord r;
    r.scenario = label;
    r.target_id = k;
    r.method = cfg.method;
    r.w_z = beamspace ? cfg.w_z : 0;
    r.w_x = beamspace ? cfg.w_x : 0;
    r.m_z = beamspace ? cfg.plan.m_z : 0;
    r.m_x = beamspace ? cfg.plan.m_x : 0;
    r.score = result.scores[k];
    result.records.push_back(r);
  }

  if (cfg.output_dir.empty()) return result;
  try {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    auto open = [&](const std::string& name) {
      const fs::path p = dir / name;
      std::ofstream os(p);
      if (!os) throw std::runtime_error("cannot open '" + p.string() + "'");
      result.artifacts.push_back(p.string());
      return os;
    };
    {
      std::ofstream os = open("report.csv");
      write_detection_report(os, result.records);
    }
    {
      std::ofstream os = open("complexity.csv");
      write_complexity_csv(os, result.complexity);
    }
    for (int k = 0; k < static_cast<int>(maps.size()); ++k) {
      const fs::path p = dir / ("map_target_" + std::to_string(k) + ".bin");
      write_map(p.string(), maps[k], cp);
      result.artifacts.push_back(p.string());
    }
    if (cfg.write_patterns) {
      const AngleGrid grid = AngleGrid::uniform_degrees(-80, 80, 161, -60, 60, 121);
      const double f = subband_frequency(opts.capture_subband, L, cp);
      for (int k = 0; k < K; ++k) {
        std::ofstream os = open("pattern_target_" + std::to_string(k) + ".csv");
        write_beam_pattern_csv(os, beam_pattern(bf.captured[k], grid, session.geometry(), f), grid);
      }
    }
  } catch (const std::exception& e) {
    throw PipelineError("report", e.what());
  }
  return result;
}

SweepAxis sweep_axis_from_string(std::string_view s) {
  if (s == "window") return SweepAxis::Window;
  if (s == "fft-size") return SweepAxis::FftSize;
  if (s == "scenario") return SweepAxis::Scenario;
  throw ConfigError("sweep axis: unknown value '" + std::string(s) + "' (expected window, fft-size or scenario)");
}

SweepResult sweep(const PipelineConfig& base, SweepAxis axis, const std::vector<std::string>& values) {
  SweepResult out;
  if (values.empty()) return out;
  std::unique_ptr<PipelineSession> session;
  for (const std::string& v : values) {
    try {
      PipelineConfig cfg = base;
      cfg.output_dir.clear();
      if (axis == SweepAxis::Window) {
        std::tie(cfg.w_z, cfg.w_x) = parse_dims(v);
      } else if (axis == SweepAxis::FftSize) {
        std::tie(cfg.plan.m_z, cfg.plan.m_x) = parse_dims(v);
      } else {
        cfg.scenario = v;
        cfg.custom_scenario.reset();
      }
      cfg.validate();
      if (axis == SweepAxis::Scenario) {
        session.reset();
        PipelineSession s(resolve_scenario(cfg), cfg.geometry, cfg.chirp);
        const PipelineResult r = run_pipeline(s, cfg);
        out.records.insert(out.records.end(), r.records.begin(), r.records.end());
      } else {
        if (!session) session = std::make_unique<PipelineSession>(resolve_scenario(cfg), cfg.geometry, cfg.chirp);
        const PipelineResult r = run_pipeline(*session, cfg);
        out.records.insert(out.records.end(), r.records.begin(), r.records.end());
      }
    } catch (const std::exception& e) {
      out.failures.push_back({v, e.what()});
    }
  }
  return out;
}

}  // namespace bsmvdr
