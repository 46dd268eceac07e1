#include "bsmvdr/cube_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "bsmvdr/detection.hpp"

namespace bsmvdr {

namespace {

constexpr char kMagic[4] = {'B', 'S', 'M', 'V'};

template <typename T>
void put(unsigned char* dst, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>(bits >> (8 * i));
}

template <typename T>
T get(const unsigned char* src) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(src[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

void write_floats(std::ostream& os, const std::vector<float>& values) {
  std::vector<unsigned char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) put(buf.data() + 4 * i, values[i]);
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("cube_io: write failed");
}

std::vector<float> read_floats(std::istream& is, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size()) {
    throw DimensionError("cube_io: truncated payload, expected " + std::to_string(n) + " float32 values");
  }
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = get<float>(buf.data() + 4 * i);
  return out;
}

BinaryHeader header_for(const ArrayGeometry& geom, const ChirpParams& cp) {
  BinaryHeader h;
  h.n_z = static_cast<std::uint16_t>(geom.n_z);
  h.n_x = static_cast<std::uint16_t>(geom.n_x);
  h.samples = static_cast<std::uint32_t>(cp.pulse_samples);
  h.pulses = static_cast<std::uint32_t>(cp.num_pulses);
  h.spacing_half_wavelengths =
      geom.design_freq > 0 ? static_cast<float>(geom.spacing / (0.5 * geom.design_wavelength())) : 0.0f;
  h.sample_rate = cp.sample_rate;
  h.carrier_freq = cp.carrier_freq;
  h.bandwidth = cp.bandwidth;
  h.pri = cp.pri;
  h.design_freq = geom.design_freq;
  return h;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cube_io: cannot open '" + path + "' for writing");
  return os;
}

}  // namespace

void write_header(std::ostream& os, const BinaryHeader& h) {
  std::array<unsigned char, BinaryHeader::kSize> b{};
  std::memcpy(b.data(), kMagic, 4);
  put(b.data() + 4, BinaryHeader::kVersion);
  put(b.data() + 6, h.flags);
  put(b.data() + 8, h.n_z);
  put(b.data() + 10, h.n_x);
  put(b.data() + 12, h.samples);
  put(b.data() + 16, h.pulses);
  put(b.data() + 20, h.spacing_half_wavelengths);
  put(b.data() + 24, h.sample_rate);
  put(b.data() + 32, h.carrier_freq);
  put(b.data() + 40, h.bandwidth);
  put(b.data() + 48, h.pri);
  put(b.data() + 56, h.design_freq);
  os.write(reinterpret_cast<const char*>(b.data()), b.size());
  if (!os) throw std::runtime_error("cube_io: header write failed");
}

BinaryHeader read_header(std::istream& is) {
  std::array<unsigned char, BinaryHeader::kSize> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (static_cast<std::size_t>(is.gcount()) != b.size()) throw DimensionError("cube_io: truncated header");
  if (std::memcmp(b.data(), kMagic, 4) != 0) throw ConfigError("cube_io: bad magic, not a BSMV file");
  const auto version = get<std::uint16_t>(b.data() + 4);
  if (version != BinaryHeader::kVersion) {
    throw ConfigError("cube_io: unsupported version " + std::to_string(version));
  }
  BinaryHeader h;
  h.flags = get<std::uint16_t>(b.data() + 6);
  h.n_z = get<std::uint16_t>(b.data() + 8);
  h.n_x = get<std::uint16_t>(b.data() + 10);
  h.samples = get<std::uint32_t>(b.data() + 12);
  h.pulses = get<std::uint32_t>(b.data() + 16);
  h.spacing_half_wavelengths = get<float>(b.data() + 20);
  h.sample_rate = get<double>(b.data() + 24);
  h.carrier_freq = get<double>(b.data() + 32);
  h.bandwidth = get<double>(b.data() + 40);
  h.pri = get<double>(b.data() + 48);
  h.design_freq = get<double>(b.data() + 56);
  return h;
}

void write_cube(std::ostream& os, const DataCube& cube) {
  write_header(os, header_for(cube.geometry(), cube.chirp()));
  const std::span<const cd> data = cube.data();
  std::vector<float> values(data.size() * 2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    values[2 * i] = static_cast<float>(data[i].real());
    values[2 * i + 1] = static_cast<float>(data[i].imag());
  }
  write_floats(os, values);
}

DataCube read_cube(std::istream& is) {
  const BinaryHeader h = read_header(is);
  if (h.flags & BinaryHeader::kRealOnly) throw ConfigError("cube_io: file holds a real-only map, not a cube");
  ArrayGeometry geom;
  geom.n_z = h.n_z;
  geom.n_x = h.n_x;
  geom.design_freq = h.design_freq;
  geom.spacing = h.design_freq > 0 ? h.spacing_half_wavelengths * 0.5 * kSpeedOfLight / h.design_freq : 0.0;
  ChirpParams cp;
  cp.sample_rate = h.sample_rate;
  cp.carrier_freq = h.carrier_freq;
  cp.bandwidth = h.bandwidth;
  cp.pri = h.pri;
  cp.pulse_samples = static_cast<int>(h.samples);
  cp.num_pulses = static_cast<int>(h.pulses);
  DataCube cube(geom, cp);
  std::span<cd> data = cube.data();
  const std::vector<float> values = read_floats(is, data.size() * 2);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = {values[2 * i], values[2 * i + 1]};
  return cube;
}

void write_cube(const std::string& path, const DataCube& cube) {
  std::ofstream os = open_out(path);
  write_cube(os, cube);
}

DataCube read_cube(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cube_io: cannot open '" + path + "'");
  return read_cube(is);
}

void write_map(std::ostream& os, const RangeDopplerMap& map, const ChirpParams& cp) {
  ChirpParams grid = cp;
  grid.pulse_samples = map.range_bins;
  grid.num_pulses = map.velocity_bins;
  ArrayGeometry single;
  single.n_z = 1;
  single.n_x = 1;
  BinaryHeader h = header_for(single, grid);
  h.flags = BinaryHeader::kRealOnly;
  write_header(os, h);
  std::vector<float> values(map.power.size());
  std::size_t k = 0;
  for (int v = 0; v < map.velocity_bins; ++v) {
    for (int r = 0; r < map.range_bins; ++r) values[k++] = static_cast<float>(map.at(r, v));
  }
  write_floats(os, values);
}

RangeDopplerMap read_map(std::istream& is) {
  const BinaryHeader h = read_header(is);
  if (!(h.flags & BinaryHeader::kRealOnly)) throw ConfigError("cube_io: file holds a complex cube, not a map");
  RangeDopplerMap map(static_cast<int>(h.samples), static_cast<int>(h.pulses));
  const std::vector<float> values = read_floats(is, map.power.size());
  std::size_t k = 0;
  for (int v = 0; v < map.velocity_bins; ++v) {
    for (int r = 0; r < map.range_bins; ++r) map.at(r, v) = values[k++];
  }
  if (h.sample_rate > 0) map.range_resolution = kSpeedOfLight / (2.0 * h.sample_rate);
  if (h.carrier_freq > 0 && h.pri > 0 && h.pulses > 0) {
    map.velocity_resolution = kSpeedOfLight / h.carrier_freq / (2.0 * h.pulses * h.pri);
  }
  return map;
}

void write_map(const std::string& path, const RangeDopplerMap& map, const ChirpParams& cp) {
  std::ofstream os = open_out(path);
  write_map(os, map, cp);
}

}  // namespace bsmvdr
