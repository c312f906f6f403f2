#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"

namespace ofdmsense::dsp {

struct Ratio {
  std::int64_t up = 1;
  std::int64_t down = 1;
};

/// Best rational approximation up/down of target/source with both terms
/// <= max_term, found by continued-fraction convergents. Throws
/// UnsupportedRatio when no convergent is within 1e-9 relative error.
inline Ratio rational_ratio(double target_hz, double source_hz, std::int64_t max_term = 4096) {
  if (!(target_hz > 0.0) || !(source_hz > 0.0))
    throw Error(ErrorCode::UnsupportedRatio, "rates must be positive");
  const double r = target_hz / source_hz;
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(r));
  std::int64_t k_prev = 0, k = 1;
  double frac = r - std::floor(r);
  while (h <= max_term && k <= max_term) {
    if (h > 0 && std::abs(static_cast<double>(h) / static_cast<double>(k) - r) <= 1e-9 * r) return {h, k};
    if (frac < 1e-12) break;
    const double inv = 1.0 / frac;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    frac = inv - static_cast<double>(a);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    h_prev = std::exchange(h, h_next);
    k_prev = std::exchange(k, k_next);
  }
  throw Error(ErrorCode::UnsupportedRatio,
              "rate ratio " + std::to_string(r) + " has no rational form with terms <= " +
                  std::to_string(max_term));
}

struct ResamplerDesign {
  int taps_per_phase = 128;     // filter length = taps_per_phase * max(up, down) + 1
  double kaiser_beta = 8.0;
  double cutoff = 0.475;        // fraction of min(source, target) rate
};

/// Kaiser-windowed sinc lowpass at the upsampled rate, DC gain = up.
inline std::vector<double> design_resampler_filter(Ratio ratio, const ResamplerDesign& d = {}) {
  const std::int64_t m = std::max(ratio.up, ratio.down);
  const std::int64_t n = d.taps_per_phase * m + 1;
  const double fc = d.cutoff / static_cast<double>(m);  // cycles per upsampled sample
  const double centre = static_cast<double>(n - 1) / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, d.kaiser_beta);
  std::vector<double> h(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) - centre;
    const double x = 2.0 * fc * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = t / centre;
    const double w = std::cyl_bessel_i(0.0, d.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[static_cast<std::size_t>(k)] = 2.0 * fc * sinc * w;
    sum += h[static_cast<std::size_t>(k)];
  }
  const double gain = static_cast<double>(ratio.up) / sum;
  for (auto& v : h) v *= gain;
  return h;
}

/// Polyphase rational resampler. Output sample j sits at input time
/// j * source/target, so index 0 of the output aligns with index 0 of the input.
inline IqBuffer resample(const IqBuffer& x, double target_rate_hz, const ResamplerDesign& design = {}) {
  const Ratio ratio = rational_ratio(target_rate_hz, x.sample_rate_hz);
  if (ratio.up == ratio.down) return IqBuffer(x.samples, target_rate_hz);
  if (x.empty()) return IqBuffer({}, target_rate_hz);

  const auto h = design_resampler_filter(ratio, design);
  const auto n_taps = static_cast<std::int64_t>(h.size());
  const std::int64_t delay = (n_taps - 1) / 2;
  const auto len = static_cast<std::int64_t>(x.size());
  const std::int64_t out_len = (len - 1) * ratio.up / ratio.down + 1;

  std::vector<cplx> out(static_cast<std::size_t>(out_len));
  for (std::int64_t j = 0; j < out_len; ++j) {
    const std::int64_t pos = j * ratio.down + delay;
    // Taps k with (pos - k) divisible by up; input index (pos - k) / up.
    std::int64_t k = pos % ratio.up;
    std::int64_t idx = (pos - k) / ratio.up;
    // Skip taps whose input index is past the end.
    if (idx >= len) {
      const std::int64_t skip = idx - (len - 1);
      k += skip * ratio.up;
      idx -= skip;
    }
    double re = 0.0, im = 0.0;
    for (; k < n_taps && idx >= 0; k += ratio.up, --idx) {
      const double c = h[static_cast<std::size_t>(k)];
      const cplx& s = x.samples[static_cast<std::size_t>(idx)];
      re += c * s.real();
      im += c * s.imag();
    }
    out[static_cast<std::size_t>(j)] = {re, im};
  }
  return IqBuffer(std::move(out), target_rate_hz);
}

}  // namespace ofdmsense::dsp
