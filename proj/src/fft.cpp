#include "bsmvdr/fft.hpp"

#include <algorithm>
#include <cmath>

namespace bsmvdr {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw DimensionError("FftPlan: size must be positive");
  pow2_ = is_power_of_two(n);
  if (pow2_) {
    while ((std::size_t{1} << log2n_) < n) ++log2n_;
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t r = 0;
      for (unsigned b = 0; b < log2n_; ++b) {
        if (i & (std::size_t{1} << b)) r |= 1u << (log2n_ - 1 - b);
      }
      bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(ang), std::sin(ang)};
    }
    return;
  }

  conv_size_ = 1;
  while (conv_size_ < 2 * n - 1) conv_size_ <<= 1;
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the argument small for long transforms.
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    const double ang = -kPi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = {std::cos(ang), std::sin(ang)};
  }
  conv_plan_.emplace_back(conv_size_);
  kernel_fft_.assign(conv_size_, cd{});
  kernel_fft_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    kernel_fft_[k] = std::conj(chirp_[k]);
    kernel_fft_[conv_size_ - k] = std::conj(chirp_[k]);
  }
  conv_plan_.front().forward(kernel_fft_);
}

std::uint64_t FftPlan::mults_per_transform() const {
  if (n_ == 1) return 0;
  if (pow2_) return static_cast<std::uint64_t>(n_ / 2) * log2n_;
  const auto inner = conv_plan_.front().mults_per_transform();
  return 2 * static_cast<std::uint64_t>(n_) + conv_size_ + 2 * inner;
}

void FftPlan::forward(std::span<cd> data, OpCounter* counter) const {
  if (data.size() != n_) throw DimensionError("FftPlan::forward: length mismatch");
  if (n_ == 1) return;
  if (pow2_) {
    radix2(data, false);
  } else {
    bluestein(data, false);
  }
  count(counter, mults_per_transform());
}

void FftPlan::inverse(std::span<cd> data, OpCounter* counter) const {
  if (data.size() != n_) throw DimensionError("FftPlan::inverse: length mismatch");
  if (n_ == 1) return;
  if (pow2_) {
    radix2(data, true);
  } else {
    bluestein(data, true);
  }
  count(counter, mults_per_transform());
}

void FftPlan::radix2(std::span<cd> data, bool inverse) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  cd* x = data.data();
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      cd* lo = x + start;
      cd* hi = lo + half;
      for (std::size_t j = 0; j < half; ++j) {
        cd w = twiddle_[j * step];
        if (inverse) w = std::conj(w);
        const cd t = cmul(w, hi[j]);
        hi[j] = lo[j] - t;
        lo[j] += t;
      }
    }
  }
}

void FftPlan::bluestein(std::span<cd> data, bool inverse) const {
  // inverse(x) = conj(forward(conj(x)))
  std::vector<cd> work(conv_size_, cd{});
  for (std::size_t k = 0; k < n_; ++k) {
    const cd v = inverse ? std::conj(data[k]) : data[k];
    work[k] = cmul(v, chirp_[k]);
  }
  const FftPlan& conv = conv_plan_.front();
  conv.forward(work);
  for (std::size_t k = 0; k < conv_size_; ++k) work[k] = cmul(work[k], kernel_fft_[k]);
  conv.inverse(work);
  const double scale = 1.0 / static_cast<double>(conv_size_);
  for (std::size_t k = 0; k < n_; ++k) {
    const cd v = cmul(work[k], chirp_[k]) * scale;
    data[k] = inverse ? std::conj(v) : v;
  }
}

}  // namespace bsmvdr
