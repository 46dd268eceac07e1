#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bsmvdr {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299'792'458.0;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent or invalid configuration (scenario, plan, pipeline).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand sizes that do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Factorization breakdown. Carries the offending pivot.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int pivot_index, double pivot_value)
      : std::runtime_error(what), pivot_index_(pivot_index), pivot_value_(pivot_value) {}

  int pivot_index() const { return pivot_index_; }
  double pivot_value() const { return pivot_value_; }

 private:
  int pivot_index_;
  double pivot_value_;
};

/// Complex-multiply tally for instrumented kernels. Kernels take a nullable
/// pointer; each worker owns one and the results are merged at join.
struct OpCounter {
  std::uint64_t complex_mults = 0;

  void add(std::uint64_t n) { complex_mults += n; }
  OpCounter& operator+=(const OpCounter& other) {
    complex_mults += other.complex_mults;
    return *this;
  }
};

inline void count(OpCounter* counter, std::uint64_t n) {
  if (counter != nullptr) counter->add(n);
}

/// (a * b) without the NaN/Inf recovery path of std::complex operator*.
inline cd cmul(cd a, cd b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// conj(a) * b
inline cd cmul_conj(cd a, cd b) {
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

}  // namespace bsmvdr
