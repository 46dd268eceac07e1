#include "bsmvdr/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "bsmvdr/fft.hpp"

namespace bsmvdr {

void ChirpParams::validate() const {
  if (!(sample_rate > 0)) throw ConfigError("chirp: sample_rate must be > 0");
  if (!(carrier_freq > 0)) throw ConfigError("chirp: carrier_freq must be > 0");
  if (bandwidth < 0 || bandwidth > sample_rate) {
    throw ConfigError("chirp: bandwidth must lie in [0, sample_rate]");
  }
  if (pulse_samples < 1) throw ConfigError("chirp: pulse_samples must be >= 1");
  if (num_pulses < 2) throw ConfigError("chirp: num_pulses must be >= 2");
  if (!(pri > 0)) throw ConfigError("chirp: pri must be > 0");
  if (pri < duration()) throw ConfigError("chirp: pri shorter than the pulse window");
}

std::vector<cd> generate_chirp(const ChirpParams& cp) {
  std::vector<cd> p(cp.pulse_samples);
  const double T = cp.duration();
  for (int n = 0; n < cp.pulse_samples; ++n) {
    const double t = n / cp.sample_rate;
    const double phase = 2.0 * kPi * (-0.5 * cp.bandwidth * t + cp.bandwidth / (2.0 * T) * t * t);
    p[n] = std::polar(1.0, phase);
  }
  return p;
}

double chirp_instantaneous_freq(const ChirpParams& cp, double n) {
  return -0.5 * cp.bandwidth + cp.bandwidth * n / cp.pulse_samples;
}

Direction direction_of(const Vec3& p) {
  const double horiz = std::hypot(p.x, p.y);
  return {std::atan2(p.x, p.y), std::atan2(p.z, horiz)};
}

double TargetSpec::range() const {
  return std::sqrt(position.x * position.x + position.y * position.y + position.z * position.z);
}

std::string_view to_string(InterfererWaveform w) {
  return w == InterfererWaveform::WidebandNoise ? "wideband-noise" : "narrowband-tone";
}

InterfererWaveform interferer_waveform_from_string(std::string_view s) {
  if (s == "wideband-noise") return InterfererWaveform::WidebandNoise;
  if (s == "narrowband-tone") return InterfererWaveform::NarrowbandTone;
  throw ConfigError("interferer: unknown waveform '" + std::string(s) +
                    "' (expected wideband-noise or narrowband-tone)");
}

DataCube::DataCube(ArrayGeometry geometry, ChirpParams chirp)
    : geometry_(geometry),
      chirp_(chirp),
      data_(static_cast<std::size_t>(geometry.size()) * chirp.pulse_samples * chirp.num_pulses) {}

int target_delay_samples(const TargetSpec& t, const ChirpParams& cp) {
  return static_cast<int>(std::lround(2.0 * t.range() / kSpeedOfLight * cp.sample_rate));
}

TargetTruth target_truth(const TargetSpec& t, const ChirpParams& cp) {
  return {target_delay_samples(t, cp),
          static_cast<int>(std::lround(t.radial_velocity / cp.velocity_resolution()))};
}

namespace {

// Per-axis phase tables exp(j omega(f) * idx) for a list of evaluation
// frequencies; omega scales linearly with frequency.
struct AxisPhases {
  int n_z = 0;
  int n_x = 0;
  std::size_t count = 0;
  std::vector<cd> x;  // [col][k]
  std::vector<cd> z;  // [row][k]

  AxisPhases(const ArrayGeometry& geom, const Direction& dir, std::span<const double> freqs)
      : n_z(geom.n_z), n_x(geom.n_x), count(freqs.size()) {
    x.resize(static_cast<std::size_t>(n_x) * count);
    z.resize(static_cast<std::size_t>(n_z) * count);
    for (std::size_t k = 0; k < count; ++k) {
      const SpatialFrequencies sf = spatial_frequencies(dir, freqs[k], geom);
      for (int c = 0; c < n_x; ++c) x[c * count + k] = std::polar(1.0, sf.omega_x * c);
      for (int r = 0; r < n_z; ++r) z[r * count + k] = std::polar(1.0, sf.omega_z * r);
    }
  }
  cd at(int row, int col, std::size_t k) const { return x[col * count + k] * z[row * count + k]; }
};

void add_target(DataCube& cube, const TargetSpec& t, std::span<const cd> chirp) {
  const ArrayGeometry& geom = cube.geometry();
  const ChirpParams& cp = cube.chirp();
  const Direction dir = t.direction();
  dir.validate();
  const int S = cp.pulse_samples;
  const int tau = target_delay_samples(t, cp);
  if (tau < 0 || tau >= S) {
    throw ConfigError("scenario: target at range " + std::to_string(t.range()) +
                      " m has delay " + std::to_string(tau) + " samples outside the " +
                      std::to_string(S) + "-sample pulse window");
  }

  // Echo sample s carries chirp sample (s - tau) mod S and is steered at the
  // chirp's instantaneous RF frequency there.
  std::vector<double> freqs(S);
  std::vector<cd> echo(S);
  for (int s = 0; s < S; ++s) {
    const int src = (s - tau + S) % S;
    freqs[s] = cp.carrier_freq + chirp_instantaneous_freq(cp, src);
    echo[s] = t.amplitude * chirp[src];
  }
  const AxisPhases phases(geom, dir, freqs);

  const double dphi = 4.0 * kPi * t.radial_velocity * cp.pri / cp.wavelength();
  std::vector<cd> doppler(cp.num_pulses);
  for (int m = 0; m < cp.num_pulses; ++m) doppler[m] = std::polar(1.0, dphi * m);

  std::vector<cd> sig(S);
  for (int cx = 0; cx < geom.n_x; ++cx) {
    for (int rz = 0; rz < geom.n_z; ++rz) {
      for (int s = 0; s < S; ++s) sig[s] = echo[s] * phases.at(rz, cx, s);
      const int n = geom.element_index(rz, cx);
      for (int m = 0; m < cp.num_pulses; ++m) {
        std::span<cd> rec = cube.record(n, m);
        const cd d = doppler[m];
        for (int s = 0; s < S; ++s) rec[s] += cmul(d, sig[s]);
      }
    }
  }
}

void add_noise_interferer(DataCube& cube, const InterfererSpec& it, double power,
                          std::mt19937_64& rng) {
  const ArrayGeometry& geom = cube.geometry();
  const ChirpParams& cp = cube.chirp();
  const int S = cp.pulse_samples;

  std::vector<int> bins;
  std::vector<double> freqs;
  const double half_bw = 0.5 * it.bandwidth_fraction * cp.sample_rate;
  for (int k = 0; k < S; ++k) {
    const double f = (k < (S + 1) / 2 ? k : k - S) * cp.sample_rate / S;
    // Distance to the band center along the circular baseband axis.
    double d = std::remainder(f - it.offset_freq, cp.sample_rate);
    if (std::abs(d) <= half_bw) {
      bins.push_back(k);
      freqs.push_back(cp.carrier_freq + it.offset_freq + d);
    }
  }
  if (bins.empty()) return;
  const AxisPhases phases(geom, it.direction, freqs);

  // Time-domain per-sample power = sum |X|^2 / S^2 = power.
  const double var = power * S * static_cast<double>(S) / static_cast<double>(bins.size());
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * var));
  const double inv_s = 1.0 / S;
  const FftPlan plan(S);
  std::vector<cd> spec(bins.size());
  std::vector<cd> buf(S);
  for (int m = 0; m < cp.num_pulses; ++m) {
    for (auto& v : spec) v = {gauss(rng), gauss(rng)};
    for (int cx = 0; cx < geom.n_x; ++cx) {
      for (int rz = 0; rz < geom.n_z; ++rz) {
        std::fill(buf.begin(), buf.end(), cd{});
        for (std::size_t i = 0; i < bins.size(); ++i) {
          buf[bins[i]] = cmul(spec[i], phases.at(rz, cx, i));
        }
        plan.inverse(buf);
        std::span<cd> rec = cube.record(geom.element_index(rz, cx), m);
        for (int s = 0; s < S; ++s) rec[s] += buf[s] * inv_s;
      }
    }
  }
}

void add_tone_interferer(DataCube& cube, const InterfererSpec& it, double power,
                         std::mt19937_64& rng) {
  const ArrayGeometry& geom = cube.geometry();
  const ChirpParams& cp = cube.chirp();
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  const double phi0 = uni(rng);
  const double amp = std::sqrt(power);
  const SpatialFrequencies sf = spatial_frequencies(it.direction, cp.carrier_freq + it.offset_freq, geom);
  const SteeringVector a = steering_vector(sf, geom);
  std::vector<cd> tone(cp.pulse_samples);
  for (int m = 0; m < cp.num_pulses; ++m) {
    const double t0 = m * cp.pri;
    for (int s = 0; s < cp.pulse_samples; ++s) {
      const double t = t0 + s / cp.sample_rate;
      // Reduce the phase in cycles before scaling to keep precision.
      const double cycles = std::fmod(it.offset_freq * t, 1.0);
      tone[s] = std::polar(amp, 2.0 * kPi * cycles + phi0);
    }
    for (int n = 0; n < geom.size(); ++n) {
      std::span<cd> rec = cube.record(n, m);
      const cd an = a(n);
      for (int s = 0; s < cp.pulse_samples; ++s) rec[s] += cmul(an, tone[s]);
    }
  }
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

DataCube synthesize_datacube(const Scenario& sc, const ArrayGeometry& geom, const ChirpParams& cp) {
  geom.validate();
  cp.validate();
  if (sc.noise_power < 0) throw ConfigError("scenario: noise_power must be >= 0");
  DataCube cube(geom, cp);
  const std::vector<cd> chirp = generate_chirp(cp);

  for (const TargetSpec& t : sc.targets) add_target(cube, t, chirp);

  const double ref_power = sc.noise_power > 0 ? sc.noise_power : 1.0;
  for (std::size_t i = 0; i < sc.interferers.size(); ++i) {
    const InterfererSpec& it = sc.interferers[i];
    it.direction.validate();
    if (!(it.power > 0)) throw ConfigError("interferer " + std::to_string(i) + ": power must be > 0");
    if (it.bandwidth_fraction < 0 || it.bandwidth_fraction > 1) {
      throw ConfigError("interferer " + std::to_string(i) + ": bandwidth_fraction outside [0, 1]");
    }
    auto rng = stream(sc.seed, 1000 + i);
    if (it.waveform == InterfererWaveform::WidebandNoise) {
      add_noise_interferer(cube, it, it.power * ref_power, rng);
    } else {
      add_tone_interferer(cube, it, it.power * ref_power, rng);
    }
  }

  if (sc.noise_power > 0) {
    auto rng = stream(sc.seed, 1);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * sc.noise_power));
    for (cd& v : cube.data()) v += cd{gauss(rng), gauss(rng)};
  }
  return cube;
}

// ---------------------------------------------------------------------------
// Presets

double PresetGeometry::ground_elevation() { return -std::atan2(kPlatformAltitude, kGroundReference); }

int preset_interferer_count(char letter) {
  switch (letter) {
    case 'A': return 2;
    case 'B': return 4;
    case 'C': return 8;
    case 'D': return 12;
    case 'E': return 16;
    default: throw ConfigError(std::string("unknown preset letter '") + letter + "'");
  }
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (char c : std::string("ABCDE")) {
    names.push_back(std::string(1, c) + "1");
    names.push_back(std::string(1, c) + "2");
  }
  names.emplace_back("noninterferer");
  return names;
}

namespace {

double frac(double v) { return v - std::floor(v); }

// Ground and sea emitters near the ground reference direction. Presets with
// more interferers extend the same list, so scenes are nested A within E.
InterfererSpec preset_interferer(int i, const ChirpParams& cp, double inr_base_db) {
  const double el_g = rad_to_deg(PresetGeometry::ground_elevation());
  InterfererSpec it;
  const double az = -60.0 + 120.0 * frac(0.5 + i * 0.6180339887);
  const double el = el_g - 6.0 + 10.0 * frac(0.2 + i * 0.7548776662);
  it.direction = Direction::from_degrees(az, el);
  const double inr_db = inr_base_db + 20.0 * frac(0.35 + i * 0.5698402910);
  it.power = std::pow(10.0, inr_db / 10.0);
  if (i % 4 == 3) {
    it.waveform = InterfererWaveform::NarrowbandTone;
    it.bandwidth_fraction = 0.0;
    it.offset_freq = (-0.35 + 0.7 * frac(0.1 + i * 0.4142135624)) * cp.sample_rate;
  } else {
    it.waveform = InterfererWaveform::WidebandNoise;
    it.bandwidth_fraction = 0.7 + 0.3 * frac(0.6 + i * 0.3819660113);
    it.offset_freq = 0.0;
  }
  return it;
}

}  // namespace

Scenario scenario_preset(std::string_view name, std::uint64_t seed, const ChirpParams& cp,
                         const PresetOptions& opts) {
  bool difficult = false;
  int n_interferers = 0;
  if (name == "noninterferer") {
    difficult = false;
  } else if (name.size() == 2 && (name[1] == '1' || name[1] == '2') && name[0] >= 'A' && name[0] <= 'E') {
    n_interferers = preset_interferer_count(name[0]);
    difficult = name[1] == '2';
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  cp.validate();

  Scenario sc;
  sc.label = std::string(name);
  sc.seed = seed;
  sc.noise_power = opts.noise_power;

  auto rng = stream(seed, 7);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  const double amp = std::sqrt(opts.noise_power * std::pow(10.0, opts.snr_db / 10.0));
  const double el_g = rad_to_deg(PresetGeometry::ground_elevation());
  const int K = PresetGeometry::kNumTargets;
  const int P = cp.num_pulses;
  const int max_q = std::max(1, P / 2 - 4);

  for (int k = 0; k < K; ++k) {
    const double u = static_cast<double>((7 * k) % K) / (K - 1);
    const double sep = difficult ? 12.5 + 7.5 * u : 25.0 + 25.0 * u;
    const double el = deg_to_rad(el_g + sep);
    const double az = deg_to_rad(-45.0 + 90.0 * static_cast<double>((3 * k) % K) / (K - 1));

    const int tau = static_cast<int>(std::lround((0.08 + 0.84 * k / (K - 1.0)) * cp.pulse_samples));
    const double range = tau * cp.range_resolution();

    const double v_frac = static_cast<double>((11 * k) % K) / (K - 1);
    const int q = static_cast<int>(std::lround(-max_q + 2.0 * max_q * v_frac));

    TargetSpec t;
    t.position = {range * std::cos(el) * std::sin(az), range * std::cos(el) * std::cos(az),
                  range * std::sin(el)};
    // Total closing speed on the Doppler grid; platform motion is folded in.
    t.radial_velocity = q * cp.velocity_resolution();
    t.amplitude = std::polar(amp, uni(rng));
    sc.targets.push_back(t);
  }
  const int letter = name == "noninterferer" ? 0 : name[0] - 'A';
  const double inr_base = opts.inr_db + letter * opts.inr_step_db;
  for (int i = 0; i < n_interferers; ++i) sc.interferers.push_back(preset_interferer(i, cp, inr_base));
  return sc;
}

}  // namespace bsmvdr
