#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "ofdmsense/core/error.hpp"

namespace ofdmsense {

using cplx = std::complex<double>;

/// Complex baseband samples tagged with their sample rate.
struct IqBuffer {
  std::vector<cplx> samples;
  double sample_rate_hz = 0.0;

  IqBuffer() = default;
  IqBuffer(std::vector<cplx> s, double rate) : samples(std::move(s)), sample_rate_hz(rate) {}

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::span<const cplx> view() const noexcept { return samples; }

  /// Throws InvalidArgument when the rate is non-positive or a sample is not finite.
  void validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
      throw Error(ErrorCode::InvalidArgument, "sample_rate_hz must be positive");
    for (const auto& s : samples) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw Error(ErrorCode::InvalidArgument, "non-finite sample in IqBuffer");
    }
  }

  /// Samples [offset, size()) as a new buffer at the same rate.
  IqBuffer drop_front(std::size_t offset) const {
    if (offset >= samples.size()) return IqBuffer({}, sample_rate_hz);
    return IqBuffer(std::vector<cplx>(samples.begin() + static_cast<std::ptrdiff_t>(offset), samples.end()),
                    sample_rate_hz);
  }
};

inline double mean_power(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : x) acc += std::norm(s);
  return acc / static_cast<double>(x.size());
}

}  // namespace ofdmsense
