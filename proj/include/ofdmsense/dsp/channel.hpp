#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/core/rng.hpp"

namespace ofdmsense::dsp {

/// SNR value that disables noise injection.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Noise samples with variance mean(|x|^2) / 10^(snr_db/10), drawn from `rng`.
inline std::vector<cplx> awgn_noise(std::span<const cplx> x, double snr_db, CounterRng& rng) {
  const double p = mean_power(x);
  if (x.empty() || !(p > 0.0)) throw Error(ErrorCode::ZeroPowerSignal, "cannot reference SNR to a zero-power signal");
  const double var = p / std::pow(10.0, snr_db / 10.0);
  std::vector<cplx> noise(x.size());
  for (auto& n : noise) n = rng.complex_normal(var);
  return noise;
}

/// Adds circular complex Gaussian noise at a per-sample SNR (signal mean
/// power over noise power). snr_db = +inf returns x unchanged.
inline IqBuffer apply_awgn(const IqBuffer& x, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return x;
  CounterRng rng(seed);
  const auto noise = awgn_noise(x.view(), snr_db, rng);
  IqBuffer out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = x.samples[i] + noise[i];
  return out;
}

/// Frequency shift: out[n] = x[n] e^{j 2 pi cfo n / fs}.
inline IqBuffer apply_cfo(const IqBuffer& x, double cfo_hz) {
  if (cfo_hz == 0.0) return x;
  IqBuffer out = x;
  for (std::size_t n = 0; n < out.size(); ++n) {
    // Reduce the phase before evaluating sin/cos so long buffers keep full precision.
    const double cycles = cfo_hz * static_cast<double>(n) / x.sample_rate_hz;
    const double ph = 2.0 * std::numbers::pi * (cycles - std::floor(cycles));
    out.samples[n] *= std::polar(1.0, ph);
  }
  return out;
}

}  // namespace ofdmsense::dsp
