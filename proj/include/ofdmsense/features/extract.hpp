#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/dsp/fft.hpp"
#include "ofdmsense/dsp/stats.hpp"
#include "ofdmsense/features/sync.hpp"

namespace ofdmsense::features {

/// One retained (symbol, subcarrier) difference feature.
struct FeatureEntry {
  int symbol = 0;
  int subcarrier = 0;        // signed index
  double amplitude = 0.0;    // |Y^s[k]|
  double phase_diff = 0.0;   // angle(Y^{s+1}[k]) - angle(Y^s[k]) in (-pi, pi]

  cplx value() const { return std::polar(amplitude, phase_diff); }
};

struct FeatureSet {
  std::vector<FeatureEntry> entries;
  int n_symbols = 0;  // symbol pairs considered
};

/// Relative width of a tie between subcarrier mean amplitudes.
inline constexpr double kNullTieSlack = 1e-9;

struct ExtractOptions {
  int n_null = 0;                          // drop up to this many lowest-mean-amplitude subcarriers
  std::optional<double> beta_fraction;     // keep only pairs with both amplitudes > fraction * p99
  bool skip_into_long_cp = false;          // drop pairs whose second symbol carries the long CP
};

/// Start of the FFT window for a symbol: the middle of its short-CP span,
/// so the long CP adds 16 samples of delay.
inline long fft_window_start(const SymbolTiming& t, int n_cp_short) {
  return t.body_start() - n_cp_short + n_cp_short / 2;
}

/// Difference features from consecutive windows of `schedule`.
/// `y` must already be CFO-corrected.
inline FeatureSet extract_features(std::span<const cplx> y, std::span<const SymbolTiming> schedule, int n_fft,
                                   int n_cp_short, const ExtractOptions& opt = {}) {
  if (schedule.size() < 2) throw Error(ErrorCode::InsufficientSamples, "feature extraction needs two symbols");
  const auto n = static_cast<std::size_t>(n_fft);
  std::vector<std::vector<cplx>> spectra;
  spectra.reserve(schedule.size());
  for (const auto& t : schedule) {
    const long start = fft_window_start(t, n_cp_short);
    if (start < 0 || static_cast<std::size_t>(start) + n > y.size())
      throw Error(ErrorCode::InsufficientSamples, "symbol window runs past the buffer");
    spectra.push_back(dsp::fft(y.subspan(static_cast<std::size_t>(start), n), n));
  }

  std::vector<bool> keep_bin(n, true);
  if (opt.n_null > 0) {
    std::vector<double> mean_amp(n, 0.0);
    for (const auto& sp : spectra)
      for (std::size_t b = 0; b < n; ++b) mean_amp[b] += std::abs(sp[b]);
    // Drop what lies strictly below the (n_null+1)-th smallest mean. A tie
    // straddling the cut is kept whole, so equal-amplitude subcarriers (BPSK,
    // QPSK) are never split by rounding noise.
    if (opt.n_null >= n_fft) {
      keep_bin.assign(n, false);
    } else {
      std::vector<double> sorted = mean_amp;
      std::nth_element(sorted.begin(), sorted.begin() + opt.n_null, sorted.end());
      const double cut = sorted[static_cast<std::size_t>(opt.n_null)] * (1.0 - kNullTieSlack);
      for (std::size_t b = 0; b < n; ++b) keep_bin[b] = mean_amp[b] >= cut;
    }
  }

  double beta = -1.0;
  if (opt.beta_fraction) {
    std::vector<double> amps;
    amps.reserve(spectra.size() * n);
    for (const auto& sp : spectra)
      for (const auto& v : sp) amps.push_back(std::abs(v));
    beta = *opt.beta_fraction * dsp::percentile(std::move(amps), 99.0);
  }

  FeatureSet out;
  out.n_symbols = static_cast<int>(spectra.size()) - 1;
  for (std::size_t s = 0; s + 1 < spectra.size(); ++s) {
    if (opt.skip_into_long_cp && schedule[s + 1].long_cp) continue;
    const auto& a = spectra[s];
    const auto& b = spectra[s + 1];
    for (std::size_t bin = 0; bin < n; ++bin) {
      if (!keep_bin[bin]) continue;
      const double amp = std::abs(a[bin]);
      if (opt.beta_fraction && !(amp > beta && std::abs(b[bin]) > beta)) continue;
      const int k = bin < n / 2 ? static_cast<int>(bin) : static_cast<int>(bin) - n_fft;
      out.entries.push_back({static_cast<int>(s), k, amp, std::arg(b[bin] * std::conj(a[bin]))});
    }
  }
  return out;
}

inline FeatureSet extract_features(const IqBuffer& y, std::span<const SymbolTiming> schedule, int n_fft,
                                   int n_cp_short, const ExtractOptions& opt = {}) {
  return extract_features(y.view(), schedule, n_fft, n_cp_short, opt);
}

/// Wi-Fi: n_symbols + 1 consecutive windows from sync.p.
inline FeatureSet extract_wifi_features(const IqBuffer& y, int n_fft, int n_cp, const SyncInfo& sync,
                                        std::size_t n_symbols, int n_null) {
  auto sched = uniform_schedule(sync.p, n_fft, n_cp, y.size());
  if (sched.size() < n_symbols + 1)
    throw Error(ErrorCode::InsufficientSamples, "capture holds " + std::to_string(sched.size()) + " symbols, need " +
                                                    std::to_string(n_symbols + 1));
  sched.resize(n_symbols + 1);
  return extract_features(y, sched, n_fft, n_cp, {n_null, std::nullopt, false});
}

}  // namespace ofdmsense::features
