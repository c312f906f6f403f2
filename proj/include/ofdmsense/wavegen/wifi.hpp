#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/core/rng.hpp"
#include "ofdmsense/dsp/fft.hpp"
#include "ofdmsense/wavegen/modulation.hpp"
#include "ofdmsense/wavegen/ofdm_config.hpp"

namespace ofdmsense::wavegen {

/// Samples of filler placed ahead of the Wi-Fi payload in place of a preamble.
inline constexpr std::size_t kPreambleSamples = 2000;

/// A synthesized frame together with the ground truth used to build it.
struct GeneratedFrame {
  IqBuffer iq;
  std::vector<std::size_t> symbol_starts;  // first CP sample of each OFDM symbol
  std::vector<int> cp_lengths;             // CP samples per symbol
  std::vector<std::vector<cplx>> grid;     // per symbol, n_fft frequency-domain values (FFT bin order)
};

namespace detail {

/// Appends one CP-prefixed symbol built from frequency-domain values in FFT bin order.
/// Time samples are scaled by sqrt(n_fft) so a forward FFT returns grid * sqrt(n_fft).
inline void append_symbol(std::vector<cplx>& out, const std::vector<cplx>& bins, int n_cp) {
  const auto n = bins.size();
  auto t = dsp::ifft(bins, n);
  const double scale = std::sqrt(static_cast<double>(n));
  for (auto& v : t) v *= scale;
  out.insert(out.end(), t.end() - n_cp, t.end());
  out.insert(out.end(), t.begin(), t.end());
}

inline std::vector<cplx> gaussian_filler(std::size_t n, double power, CounterRng& rng) {
  std::vector<cplx> v(n);
  for (auto& s : v) s = rng.complex_normal(power);
  return v;
}

}  // namespace detail

/// Wi-Fi payload of `n_symbols` OFDM symbols after kPreambleSamples of
/// Gaussian filler with the payload's mean power. Data subcarriers carry
/// uniformly random points of cfg.modulation; pilots carry random BPSK.
inline GeneratedFrame generate_wifi_frame(const OfdmConfig& cfg, std::size_t n_symbols, std::uint64_t seed) {
  if (!is_wifi(cfg.family)) throw Error(ErrorCode::ConfigMismatch, "generate_wifi_frame needs a Wi-Fi config");
  validate(cfg);
  if (std::abs(cfg.tx_rate_hz - kWifiRateHz) > 1.0) throw Error(ErrorCode::ConfigMismatch, "Wi-Fi TX rate must be 20 MHz");

  CounterRng rng(seed);
  CounterRng filler_rng = rng.split(1);
  CounterRng data_rng = rng.split(2);

  const auto n = static_cast<std::size_t>(cfg.n_fft);
  const int n_cp = cfg.n_cp();
  const double power = static_cast<double>(cfg.occupied_subcarriers.size()) / static_cast<double>(n);
  const auto points = constellation(cfg.modulation);

  std::vector<bool> is_pilot(n, false);
  for (int k : cfg.pilot_subcarriers) is_pilot[dsp::bin_of(k, n)] = true;

  GeneratedFrame f;
  f.iq.sample_rate_hz = cfg.tx_rate_hz;
  f.iq.samples = detail::gaussian_filler(kPreambleSamples, power, filler_rng);
  f.iq.samples.reserve(kPreambleSamples + n_symbols * static_cast<std::size_t>(cfg.symbol_length()));
  for (std::size_t s = 0; s < n_symbols; ++s) {
    std::vector<cplx> bins(n);
    for (int k : cfg.occupied_subcarriers) {
      const auto b = dsp::bin_of(k, n);
      if (is_pilot[b])
        bins[b] = data_rng.uniform_int(0, 1) ? cplx{-1.0, 0.0} : cplx{1.0, 0.0};
      else
        bins[b] = points[static_cast<std::size_t>(data_rng.uniform_int(0, static_cast<std::int64_t>(points.size()) - 1))];
    }
    f.symbol_starts.push_back(f.iq.samples.size());
    f.cp_lengths.push_back(n_cp);
    detail::append_symbol(f.iq.samples, bins, n_cp);
    f.grid.push_back(std::move(bins));
  }
  return f;
}

inline IqBuffer build_wifi_frame(const OfdmConfig& cfg, std::size_t n_symbols, std::uint64_t seed) {
  return generate_wifi_frame(cfg, n_symbols, seed).iq;
}

/// Symbols needed so preamble + payload spans at least `duration_s`.
inline std::size_t wifi_symbols_for_duration(const OfdmConfig& cfg, double duration_s) {
  const double samples = duration_s * cfg.tx_rate_hz - static_cast<double>(kPreambleSamples);
  if (samples <= 0) return 0;
  return static_cast<std::size_t>(std::ceil(samples / cfg.symbol_length()));
}

}  // namespace ofdmsense::wavegen
