#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bsmvdr/common.hpp"

namespace bsmvdr {

/// Complex FFT of a fixed length. Power-of-two sizes use an iterative radix-2
/// kernel; other sizes go through Bluestein's chirp-z reformulation on a
/// power-of-two grid. Both directions are unscaled:
///   forward  X[k] = sum_n x[n] exp(-j 2 pi n k / N)
///   inverse  x[n] = sum_k X[k] exp(+j 2 pi n k / N)
/// A plan is immutable after construction and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::span<cd> data, OpCounter* counter = nullptr) const;
  void inverse(std::span<cd> data, OpCounter* counter = nullptr) const;

  /// Complex multiplies performed by one transform of this plan.
  std::uint64_t mults_per_transform() const;

 private:
  void radix2(std::span<cd> data, bool inverse) const;
  void bluestein(std::span<cd> data, bool inverse) const;

  std::size_t n_;
  unsigned log2n_ = 0;
  bool pow2_ = false;
  std::vector<std::uint32_t> bitrev_;
  std::vector<cd> twiddle_;  // exp(-j 2 pi k / n), k < n/2

  // Bluestein state.
  std::size_t conv_size_ = 0;
  std::vector<cd> chirp_;         // exp(-j pi k^2 / n)
  std::vector<cd> kernel_fft_;    // FFT of the conjugate chirp, length conv_size_
  std::vector<FftPlan> conv_plan_;  // one element; vector avoids a recursive member
};

bool is_power_of_two(std::size_t n);

}  // namespace bsmvdr
