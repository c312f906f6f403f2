#pragma once

#include <bit>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"

namespace ofdmsense::dsp {

namespace detail {

// In-place iterative radix-2 transform. sign = -1 forward, +1 inverse (unscaled).
inline void fft_radix2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Twiddles evaluated directly (no recurrence) to keep round-off at the 1e-15 level.
  std::vector<cplx> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(ang), std::sin(ang)};
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k * step];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

inline void check_size(std::size_t have, std::size_t n) {
  if (n == 0 || !std::has_single_bit(n))
    throw Error(ErrorCode::InvalidArgument, "transform size must be a power of two");
  if (have < n) throw Error(ErrorCode::InsufficientSamples, "fewer samples than transform size");
}

}  // namespace detail

/// Unnormalised forward DFT of the first n samples of x.
inline std::vector<cplx> fft(std::span<const cplx> x, std::size_t n) {
  detail::check_size(x.size(), n);
  std::vector<cplx> a(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  detail::fft_radix2(a, -1);
  return a;
}

/// Inverse DFT of the first n samples, scaled by 1/n.
inline std::vector<cplx> ifft(std::span<const cplx> x, std::size_t n) {
  detail::check_size(x.size(), n);
  std::vector<cplx> a(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  detail::fft_radix2(a, +1);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : a) v *= scale;
  return a;
}

/// FFT bin for a signed subcarrier index in [-n/2, n/2).
constexpr std::size_t bin_of(int subcarrier, std::size_t n) noexcept {
  const auto sn = static_cast<long long>(n);
  return static_cast<std::size_t>(((subcarrier % sn) + sn) % sn);
}

}  // namespace ofdmsense::dsp
