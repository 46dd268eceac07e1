#include "bsmvdr/channelizer.hpp"

#include <cmath>
#include <string>

#include "bsmvdr/fft.hpp"

namespace bsmvdr {

int subband_number(int b, int L) { return L == 1 ? 0 : b - L / 2 + 1; }

int subband_storage(int l, int L) { return L == 1 ? 0 : l + L / 2 - 1; }

double subband_frequency(int b, int L, const ChirpParams& cp) {
  if (L == 1) return cp.carrier_freq;
  return subband_center_freq(subband_number(b, L), L, cp.carrier_freq, cp.sample_rate);
}

void validate_subband_count(int pulse_samples, int L) {
  if (L < 1 || (L != 1 && L % 2 != 0)) {
    throw ConfigError("channelizer: L must be 1 or even (got " + std::to_string(L) + ")");
  }
  if (pulse_samples % L != 0) {
    throw ConfigError("channelizer: L=" + std::to_string(L) + " does not divide pulse_samples=" +
                      std::to_string(pulse_samples));
  }
}

SubbandCube::SubbandCube(int antennas, int L, int snapshots, int pulses)
    : antennas_(antennas),
      num_subbands_(L),
      snapshots_(snapshots),
      pulses_(pulses),
      data_(static_cast<std::size_t>(antennas) * L * snapshots * pulses) {}

namespace {

// Filter-bank tables shared by analysis and synthesis.
struct BlockDft {
  int L;
  FftPlan plan;
  std::vector<cd> modulation;  // exp(+j pi i / L)
  std::vector<int> storage_of_bin;

  explicit BlockDft(int num_subbands) : L(num_subbands), plan(num_subbands) {
    modulation.resize(L);
    storage_of_bin.resize(L);
    for (int i = 0; i < L; ++i) {
      modulation[i] = L == 1 ? cd{1.0, 0.0} : std::polar(1.0, kPi * i / L);
      // l = k for k <= L/2, k - L above.
      const int l = (L == 1) ? 0 : (i <= L / 2 ? i : i - L);
      storage_of_bin[i] = subband_storage(l, L);
    }
  }

  // block: L fast-time samples in, L bins out (bin order).
  void analyze(std::span<cd> block, OpCounter* counter) const {
    if (L == 1) return;
    for (int i = 0; i < L; ++i) block[i] = cmul(block[i], modulation[i]);
    count(counter, L);
    plan.forward(block, counter);
  }

  void synthesize(std::span<cd> block, OpCounter* counter) const {
    if (L == 1) return;
    plan.inverse(block, counter);
    const double scale = 1.0 / L;
    for (int i = 0; i < L; ++i) block[i] = cmul_conj(modulation[i], block[i]) * scale;
    count(counter, L);
  }
};

}  // namespace

SubbandCube channelize(const DataCube& cube, int L, OpCounter* counter) {
  validate_subband_count(cube.samples(), L);
  const int snaps = cube.samples() / L;
  SubbandCube out(cube.antennas(), L, snaps, cube.pulses());
  const BlockDft bank(L);
  std::vector<cd> block(L);
  for (int n = 0; n < cube.antennas(); ++n) {
    for (int m = 0; m < cube.pulses(); ++m) {
      std::span<const cd> rec = cube.record(n, m);
      for (int t = 0; t < snaps; ++t) {
        std::copy_n(rec.begin() + static_cast<std::ptrdiff_t>(t) * L, L, block.begin());
        bank.analyze(block, counter);
        for (int k = 0; k < L; ++k) out.at(n, bank.storage_of_bin[k], t, m) = block[k];
      }
    }
  }
  return out;
}

SubbandSeries channelize(const WidebandSeries& x, int L, OpCounter* counter) {
  validate_subband_count(x.samples, L);
  const int snaps = x.samples / L;
  SubbandSeries out(L, snaps, x.pulses);
  const BlockDft bank(L);
  std::vector<cd> block(L);
  for (int m = 0; m < x.pulses; ++m) {
    std::span<const cd> rec = x.pulse(m);
    for (int t = 0; t < snaps; ++t) {
      std::copy_n(rec.begin() + static_cast<std::ptrdiff_t>(t) * L, L, block.begin());
      bank.analyze(block, counter);
      for (int k = 0; k < L; ++k) out.at(bank.storage_of_bin[k], t, m) = block[k];
    }
  }
  return out;
}

WidebandSeries synthesize(const SubbandSeries& in, OpCounter* counter) {
  const int L = in.num_subbands;
  if (L < 1 || in.snapshots < 1 || in.pulses < 1 ||
      in.data.size() != static_cast<std::size_t>(L) * in.snapshots * in.pulses) {
    throw DimensionError("synthesize: subband series dimensions inconsistent");
  }
  if (L != 1 && L % 2 != 0) throw DimensionError("synthesize: L must be 1 or even");
  WidebandSeries out(L * in.snapshots, in.pulses);
  const BlockDft bank(L);
  std::vector<cd> block(L);
  for (int m = 0; m < in.pulses; ++m) {
    std::span<cd> rec = out.pulse(m);
    for (int t = 0; t < in.snapshots; ++t) {
      for (int k = 0; k < L; ++k) block[k] = in.at(bank.storage_of_bin[k], t, m);
      bank.synthesize(block, counter);
      std::copy(block.begin(), block.end(), rec.begin() + static_cast<std::ptrdiff_t>(t) * L);
    }
  }
  return out;
}

WidebandSeries antenna_series(const DataCube& cube, int antenna) {
  WidebandSeries w(cube.samples(), cube.pulses());
  for (int m = 0; m < cube.pulses(); ++m) {
    std::span<const cd> rec = cube.record(antenna, m);
    std::copy(rec.begin(), rec.end(), w.pulse(m).begin());
  }
  return w;
}

}  // namespace bsmvdr
