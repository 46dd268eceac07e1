#include "bsmvdr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace bsmvdr {

namespace {

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path + ": expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(path + "." + key + ": unknown key");
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": bad value '" + YAML::Dump(node) + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
  if (const YAML::Node n = parent[key]) out = get<T>(n, path + "." + key);
}

std::pair<int, int> read_dims(const YAML::Node& n, const std::string& path) {
  if (n.IsSequence()) {
    if (n.size() != 2) throw ConfigError(path + ": expected two values");
    return {get<int>(n[0], path + "[0]"), get<int>(n[1], path + "[1]")};
  }
  try {
    return parse_dims(get<std::string>(n, path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_pipeline(const YAML::Node& n, PipelineConfig& cfg) {
  const std::string p = "pipeline";
  check_keys(n, p,
             {"scenario", "method", "subbands", "fft", "window", "loading", "training", "cfar", "gate",
              "output_dir", "seed", "snr_db", "inr_db", "inr_step_db", "recenter_per_subband", "threads", "write_maps",
              "write_patterns"});
  read(n, "scenario", p, cfg.scenario);
  if (const YAML::Node m = n["method"]) {
    try {
      cfg.method = method_from_string(get<std::string>(m, p + ".method"));
    } catch (const ConfigError& e) {
      throw ConfigError(p + "." + e.what());
    }
  }
  read(n, "subbands", p, cfg.num_subbands);
  if (const YAML::Node d = n["fft"]) std::tie(cfg.plan.m_z, cfg.plan.m_x) = read_dims(d, p + ".fft");
  if (const YAML::Node d = n["window"]) std::tie(cfg.w_z, cfg.w_x) = read_dims(d, p + ".window");
  read(n, "loading", p, cfg.loading);
  if (const YAML::Node t = n["training"]) {
    try {
      cfg.training = TrainingPolicy::parse(get<std::string>(t, p + ".training"));
    } catch (const ConfigError& e) {
      throw ConfigError(p + "." + e.what());
    }
  }
  if (const YAML::Node c = n["cfar"]) {
    const std::string cp = p + ".cfar";
    check_keys(c, cp, {"threshold_db", "guard", "floor", "window"});
    read(c, "threshold_db", cp, cfg.cfar.threshold_db);
    read(c, "guard", cp, cfg.cfar.guard);
    read(c, "window", cp, cfg.cfar.window);
    if (const YAML::Node f = c["floor"]) {
      const std::string s = get<std::string>(f, cp + ".floor");
      if (s == "median") {
        cfg.cfar.floor = FloorEstimator::Median;
      } else if (s == "mean") {
        cfg.cfar.floor = FloorEstimator::Mean;
      } else {
        throw ConfigError(cp + ".floor: expected median or mean, got '" + s + "'");
      }
    }
  }
  if (const YAML::Node g = n["gate"]) {
    check_keys(g, p + ".gate", {"range_bins", "velocity_bins"});
    read(g, "range_bins", p + ".gate", cfg.gate.range_bins);
    read(g, "velocity_bins", p + ".gate", cfg.gate.velocity_bins);
  }
  read(n, "output_dir", p, cfg.output_dir);
  read(n, "seed", p, cfg.seed);
  read(n, "snr_db", p, cfg.snr_db);
  read(n, "inr_db", p, cfg.inr_db);
  read(n, "inr_step_db", p, cfg.inr_step_db);
  read(n, "recenter_per_subband", p, cfg.recenter_per_subband);
  read(n, "threads", p, cfg.threads);
  read(n, "write_maps", p, cfg.write_maps);
  read(n, "write_patterns", p, cfg.write_patterns);
}

void apply_array(const YAML::Node& n, ArrayGeometry& g) {
  check_keys(n, "array", {"n_z", "n_x", "spacing_m", "design_freq"});
  read(n, "n_z", "array", g.n_z);
  read(n, "n_x", "array", g.n_x);
  read(n, "design_freq", "array", g.design_freq);
  if (const YAML::Node s = n["spacing_m"]) {
    g.spacing = get<double>(s, "array.spacing_m");
  } else if (g.design_freq > 0) {
    g.spacing = 0.5 * kSpeedOfLight / g.design_freq;
  }
}

void apply_radio(const YAML::Node& n, ChirpParams& cp) {
  check_keys(n, "radio", {"carrier_freq", "sample_rate", "bandwidth", "pulse_samples", "num_pulses", "pri"});
  read(n, "carrier_freq", "radio", cp.carrier_freq);
  read(n, "sample_rate", "radio", cp.sample_rate);
  read(n, "bandwidth", "radio", cp.bandwidth);
  read(n, "pulse_samples", "radio", cp.pulse_samples);
  read(n, "num_pulses", "radio", cp.num_pulses);
  read(n, "pri", "radio", cp.pri);
}

Scenario parse_scenario(const YAML::Node& n, std::uint64_t default_seed) {
  const std::string p = "scenario";
  check_keys(n, p, {"label", "noise_power", "seed", "targets", "interferers"});
  Scenario sc;
  sc.label = "custom";
  sc.seed = default_seed;
  read(n, "label", p, sc.label);
  read(n, "noise_power", p, sc.noise_power);
  read(n, "seed", p, sc.seed);
  if (!(sc.noise_power >= 0)) throw ConfigError(p + ".noise_power: must be >= 0");

  if (const YAML::Node ts = n["targets"]) {
    if (!ts.IsSequence()) throw ConfigError(p + ".targets: expected a list");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const YAML::Node t = ts[i];
      const std::string tp = p + ".targets[" + std::to_string(i) + "]";
      check_keys(t, tp,
                 {"position", "range_m", "azimuth_deg", "elevation_deg", "radial_velocity", "amplitude", "snr_db",
                  "phase_deg"});
      TargetSpec spec;
      if (const YAML::Node pos = t["position"]) {
        if (!pos.IsSequence() || pos.size() != 3) throw ConfigError(tp + ".position: expected [x, y, z]");
        spec.position = {get<double>(pos[0], tp + ".position[0]"), get<double>(pos[1], tp + ".position[1]"),
                         get<double>(pos[2], tp + ".position[2]")};
      } else if (t["range_m"]) {
        const double r = get<double>(t["range_m"], tp + ".range_m");
        double az = 0.0;
        double el = 0.0;
        read(t, "azimuth_deg", tp, az);
        read(t, "elevation_deg", tp, el);
        const double a = deg_to_rad(az);
        const double e = deg_to_rad(el);
        spec.position = {r * std::cos(e) * std::sin(a), r * std::cos(e) * std::cos(a), r * std::sin(e)};
      } else {
        throw ConfigError(tp + ": needs position or range_m");
      }
      read(t, "radial_velocity", tp, spec.radial_velocity);
      double phase = 0.0;
      read(t, "phase_deg", tp, phase);
      if (const YAML::Node a = t["amplitude"]) {
        if (a.IsSequence()) {
          if (a.size() != 2) throw ConfigError(tp + ".amplitude: expected [re, im]");
          spec.amplitude = {get<double>(a[0], tp + ".amplitude[0]"), get<double>(a[1], tp + ".amplitude[1]")};
        } else {
          spec.amplitude = std::polar(get<double>(a, tp + ".amplitude"), deg_to_rad(phase));
        }
      } else if (const YAML::Node s = t["snr_db"]) {
        const double snr = get<double>(s, tp + ".snr_db");
        spec.amplitude = std::polar(std::sqrt(sc.noise_power * std::pow(10.0, snr / 10.0)), deg_to_rad(phase));
      }
      sc.targets.push_back(spec);
    }
  }

  if (const YAML::Node is = n["interferers"]) {
    if (!is.IsSequence()) throw ConfigError(p + ".interferers: expected a list");
    for (std::size_t i = 0; i < is.size(); ++i) {
      const YAML::Node s = is[i];
      const std::string ip = p + ".interferers[" + std::to_string(i) + "]";
      check_keys(s, ip,
                 {"azimuth_deg", "elevation_deg", "power", "inr_db", "waveform", "bandwidth_fraction", "offset_freq"});
      InterfererSpec spec;
      double az = 0.0;
      double el = 0.0;
      read(s, "azimuth_deg", ip, az);
      read(s, "elevation_deg", ip, el);
      spec.direction = Direction::from_degrees(az, el);
      read(s, "power", ip, spec.power);
      if (const YAML::Node inr = s["inr_db"]) spec.power = std::pow(10.0, get<double>(inr, ip + ".inr_db") / 10.0);
      if (const YAML::Node w = s["waveform"]) {
        try {
          spec.waveform = interferer_waveform_from_string(get<std::string>(w, ip + ".waveform"));
        } catch (const std::exception& e) {
          throw ConfigError(ip + ".waveform: " + e.what());
        }
      }
      read(s, "bandwidth_fraction", ip, spec.bandwidth_fraction);
      read(s, "offset_freq", ip, spec.offset_freq);
      sc.interferers.push_back(spec);
    }
  }
  return sc;
}

YAML::Node load(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml: ") + e.what());
  }
}

}  // namespace

void apply_config_yaml(const std::string& text, PipelineConfig& cfg) {
  const YAML::Node root = load(text);
  if (root.IsNull()) return;
  check_keys(root, "config", {"pipeline", "array", "radio", "scenario"});
  if (const YAML::Node n = root["pipeline"]) apply_pipeline(n, cfg);
  if (const YAML::Node n = root["array"]) apply_array(n, cfg.geometry);
  if (const YAML::Node n = root["radio"]) apply_radio(n, cfg.chirp);
  if (const YAML::Node n = root["scenario"]) cfg.custom_scenario = parse_scenario(n, cfg.seed);
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  apply_config_yaml(ss.str(), base);
  return base;
}

Scenario parse_scenario_yaml(const std::string& text) {
  const YAML::Node root = load(text);
  return parse_scenario(root["scenario"] ? root["scenario"] : root, 0);
}

std::string dump_config_yaml(const PipelineConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "pipeline" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << cfg.scenario;
  e << YAML::Key << "method" << YAML::Value << std::string(to_string(cfg.method));
  e << YAML::Key << "subbands" << YAML::Value << cfg.num_subbands;
  e << YAML::Key << "fft" << YAML::Value << (std::to_string(cfg.plan.m_z) + "x" + std::to_string(cfg.plan.m_x));
  e << YAML::Key << "window" << YAML::Value << (std::to_string(cfg.w_z) + "x" + std::to_string(cfg.w_x));
  e << YAML::Key << "loading" << YAML::Value << cfg.loading;
  e << YAML::Key << "training" << YAML::Value << cfg.training.to_string();
  e << YAML::Key << "cfar" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "threshold_db" << YAML::Value << cfg.cfar.threshold_db;
  e << YAML::Key << "guard" << YAML::Value << cfg.cfar.guard;
  e << YAML::Key << "floor" << YAML::Value << (cfg.cfar.floor == FloorEstimator::Median ? "median" : "mean");
  e << YAML::Key << "window" << YAML::Value << cfg.cfar.window;
  e << YAML::EndMap;
  e << YAML::Key << "gate" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "range_bins" << YAML::Value << cfg.gate.range_bins;
  e << YAML::Key << "velocity_bins" << YAML::Value << cfg.gate.velocity_bins;
  e << YAML::EndMap;
  e << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;
  e << YAML::Key << "snr_db" << YAML::Value << cfg.snr_db;
  e << YAML::Key << "inr_db" << YAML::Value << cfg.inr_db;
  e << YAML::Key << "inr_step_db" << YAML::Value << cfg.inr_step_db;
  e << YAML::Key << "recenter_per_subband" << YAML::Value << cfg.recenter_per_subband;
  e << YAML::Key << "threads" << YAML::Value << cfg.threads;
  e << YAML::Key << "write_maps" << YAML::Value << cfg.write_maps;
  e << YAML::Key << "write_patterns" << YAML::Value << cfg.write_patterns;
  e << YAML::EndMap;

  e << YAML::Key << "array" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_z" << YAML::Value << cfg.geometry.n_z;
  e << YAML::Key << "n_x" << YAML::Value << cfg.geometry.n_x;
  e << YAML::Key << "spacing_m" << YAML::Value << cfg.geometry.spacing;
  e << YAML::Key << "design_freq" << YAML::Value << cfg.geometry.design_freq;
  e << YAML::EndMap;

  e << YAML::Key << "radio" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "carrier_freq" << YAML::Value << cfg.chirp.carrier_freq;
  e << YAML::Key << "sample_rate" << YAML::Value << cfg.chirp.sample_rate;
  e << YAML::Key << "bandwidth" << YAML::Value << cfg.chirp.bandwidth;
  e << YAML::Key << "pulse_samples" << YAML::Value << cfg.chirp.pulse_samples;
  e << YAML::Key << "num_pulses" << YAML::Value << cfg.chirp.num_pulses;
  e << YAML::Key << "pri" << YAML::Value << cfg.chirp.pri;
  e << YAML::EndMap;

  if (cfg.custom_scenario) {
    const Scenario& sc = *cfg.custom_scenario;
    e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "label" << YAML::Value << sc.label;
    e << YAML::Key << "noise_power" << YAML::Value << sc.noise_power;
    e << YAML::Key << "seed" << YAML::Value << sc.seed;
    e << YAML::Key << "targets" << YAML::Value << YAML::BeginSeq;
    for (const TargetSpec& t : sc.targets) {
      e << YAML::BeginMap;
      e << YAML::Key << "position" << YAML::Value << YAML::Flow << YAML::BeginSeq << t.position.x << t.position.y
        << t.position.z << YAML::EndSeq;
      e << YAML::Key << "radial_velocity" << YAML::Value << t.radial_velocity;
      e << YAML::Key << "amplitude" << YAML::Value << YAML::Flow << YAML::BeginSeq << t.amplitude.real()
        << t.amplitude.imag() << YAML::EndSeq;
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "interferers" << YAML::Value << YAML::BeginSeq;
    for (const InterfererSpec& s : sc.interferers) {
      e << YAML::BeginMap;
      e << YAML::Key << "azimuth_deg" << YAML::Value << rad_to_deg(s.direction.azimuth);
      e << YAML::Key << "elevation_deg" << YAML::Value << rad_to_deg(s.direction.elevation);
      e << YAML::Key << "power" << YAML::Value << s.power;
      e << YAML::Key << "waveform" << YAML::Value << std::string(to_string(s.waveform));
      e << YAML::Key << "bandwidth_fraction" << YAML::Value << s.bandwidth_fraction;
      e << YAML::Key << "offset_freq" << YAML::Value << s.offset_freq;
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace bsmvdr
