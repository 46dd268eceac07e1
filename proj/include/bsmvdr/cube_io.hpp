#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "bsmvdr/scene.hpp"

namespace bsmvdr {

struct RangeDopplerMap;

/// Fixed 64-byte little-endian header shared by cube and map files.
///
///   off  size  field
///     0     4  magic "BSMV"
///     4     2  version (1)
///     6     2  flags (bit 0: real-only payload)
///     8     2  n_z
///    10     2  n_x
///    12     4  fast-time samples (range bins for maps)
///    16     4  pulses (velocity bins for maps)
///    20     4  element spacing / (lambda_d / 2), float32
///    24     8  sample rate, Hz
///    32     8  carrier frequency, Hz
///    40     8  chirp bandwidth, Hz
///    48     8  pri, s
///    56     8  design frequency, Hz
///
/// Payload: float32 values, antenna-major, then pulse, then fast-time.
/// Complex payloads interleave (re, im).
struct BinaryHeader {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::uint16_t kRealOnly = 0x1;
  static constexpr std::size_t kSize = 64;

  std::uint16_t flags = 0;
  std::uint16_t n_z = 1;
  std::uint16_t n_x = 1;
  std::uint32_t samples = 0;
  std::uint32_t pulses = 0;
  float spacing_half_wavelengths = 1.0f;
  double sample_rate = 0;
  double carrier_freq = 0;
  double bandwidth = 0;
  double pri = 0;
  double design_freq = 0;
};

void write_header(std::ostream& os, const BinaryHeader& h);
BinaryHeader read_header(std::istream& is);

void write_cube(std::ostream& os, const DataCube& cube);
DataCube read_cube(std::istream& is);
void write_cube(const std::string& path, const DataCube& cube);
DataCube read_cube(const std::string& path);

/// Map payload is laid out velocity-major, range bins contiguous.
void write_map(std::ostream& os, const RangeDopplerMap& map, const ChirpParams& cp);
RangeDopplerMap read_map(std::istream& is);
void write_map(const std::string& path, const RangeDopplerMap& map, const ChirpParams& cp);

}  // namespace bsmvdr
