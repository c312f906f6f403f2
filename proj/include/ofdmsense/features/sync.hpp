#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/dsp/caf.hpp"
#include "ofdmsense/dsp/channel.hpp"
#include "ofdmsense/dsp/peaks.hpp"
#include "ofdmsense/dsp/stats.hpp"
#include "ofdmsense/wavegen/ofdm_config.hpp"

namespace ofdmsense::features {

struct SyncInfo {
  long p = 0;                             // first CP sample of a symbol, modulo the symbol length
  std::optional<long> index_long_cp;      // 5G normal CP only, modulo 15360
  double cfo_hz = 0.0;
};

/// Where one OFDM symbol sits in a buffer.
struct SymbolTiming {
  long cp_start = 0;
  int n_cp = 0;
  bool long_cp = false;

  long body_start() const { return cp_start + n_cp; }
};

inline std::size_t min_peak_distance(std::size_t sym) { return static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(sym))); }

/// CP start offset in [0, n_fft + n_cp): circular median of the |R(m)| peak
/// positions modulo the symbol length.
inline long locate_cp_start(std::span<const cplx> y, int n_fft, int n_cp) {
  const auto sym = static_cast<std::size_t>(n_fft + n_cp);
  if (y.size() < 4 * sym) throw Error(ErrorCode::InsufficientSamples, "CP search needs at least four symbols");
  const auto trace = dsp::autocorr_cp_magnitude(y, static_cast<std::size_t>(n_fft), static_cast<std::size_t>(n_cp));
  const auto peaks = dsp::find_peaks(trace, min_peak_distance(sym));
  if (peaks.size() < 3) throw Error(ErrorCode::SyncFailure, "fewer than three CP correlation peaks");
  std::vector<long long> residues;
  residues.reserve(peaks.size());
  for (auto m : peaks) residues.push_back(static_cast<long long>(m % sym));
  return static_cast<long>(dsp::circular_median(residues, static_cast<long long>(sym)));
}

inline long locate_cp_start(const IqBuffer& y, int n_fft, int n_cp) { return locate_cp_start(y.view(), n_fft, n_cp); }

/// Drops local maxima far below the typical CP peak, such as the tail of a
/// partial correlation window at the trace edge.
inline void drop_weak_peaks(std::vector<std::size_t>& peaks, std::span<const double> trace, double fraction = 0.25) {
  if (peaks.empty()) return;
  std::vector<double> heights;
  for (auto m : peaks) heights.push_back(trace[m]);
  const double floor = fraction * dsp::median(heights);
  std::erase_if(peaks, [&](std::size_t m) { return trace[m] < floor; });
}

struct LongCpResult {
  long index_long_cp = 0;   // modulo 15360
  int long_symbol = 0;      // slot of the long-CP symbol within the 0.5 ms grid
  double pre_long_residue = 0.0;
  std::vector<double> delta_p;  // per slot, windows averaged
  std::vector<double> variance; // per slot, across windows
};

/// Locates the long-CP symbol of a 5G normal-CP signal at 30.72 MHz.
///
/// Six 0.5 ms windows are scanned for |R(m)| peaks. Peaks are folded onto the
/// 7*2^mu symbol slots of one half subframe; the long CP shifts every later
/// symbol by 16 samples, so the slot with the largest jump in peak position
/// to its successor, and the larger spread across windows, is the long one.
inline LongCpResult find_long_cp(std::span<const cplx> y5, int mu) {
  if (mu < 0 || mu > 2) throw Error(ErrorCode::ConfigMismatch, "mu must be 0, 1 or 2");
  constexpr int kWindows = 6;
  const int n_fft = nr_n_fft(mu);
  const int n_cp = nr_short_cp(mu);
  const long sym = n_fft + n_cp;
  const int m_slots = nr_symbols_per_half_subframe(mu, NrCp::Normal);
  const long half = kNrHalfSubframeSamples;
  const long win_len = half + 2 * sym + n_cp;
  if (static_cast<long>(y5.size()) < (kWindows - 1) * half + win_len)
    throw Error(ErrorCode::InsufficientSamples, "long-CP search needs 3 ms plus three symbols at 30.72 MHz");

  std::vector<std::vector<std::size_t>> window_peaks;
  std::vector<double> all_residues;
  for (int i = 0; i < kWindows; ++i) {
    const auto w = y5.subspan(static_cast<std::size_t>(i * half), static_cast<std::size_t>(win_len));
    const auto trace = dsp::autocorr_cp_magnitude(w, static_cast<std::size_t>(n_fft), static_cast<std::size_t>(n_cp));
    auto peaks = dsp::find_peaks(trace, min_peak_distance(static_cast<std::size_t>(sym)));
    drop_weak_peaks(peaks, trace);
    // A CP cut off by the window start drags its peak towards 0; the same
    // slot is seen again in the window's two-symbol extension.
    std::erase_if(peaks, [&](std::size_t m) { return m < static_cast<std::size_t>(n_cp); });
    if (peaks.size() < static_cast<std::size_t>(std::max(3, m_slots / 2)))
      throw Error(ErrorCode::SyncFailure, "too few CP correlation peaks in window " + std::to_string(i));
    for (auto m : peaks) all_residues.push_back(static_cast<double>(static_cast<long>(m) % sym));
    window_peaks.push_back(std::move(peaks));
  }

  // Windows start on multiples of 0.5 ms, so one reference residue numbers
  // the slots identically in all of them.
  const double ref = dsp::circular_mean(all_residues, static_cast<double>(sym));
  const double max_spread = std::max(n_cp / 2.0, 24.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> v(kWindows, std::vector<double>(static_cast<std::size_t>(m_slots), nan));
  for (int i = 0; i < kWindows; ++i) {
    std::vector<double> sum(static_cast<std::size_t>(m_slots), 0.0);
    std::vector<int> count(static_cast<std::size_t>(m_slots), 0);
    for (auto m : window_peaks[static_cast<std::size_t>(i)]) {
      const double pos = static_cast<double>(m);
      const double u = ref + dsp::wrap_centered(pos - ref, static_cast<double>(sym));
      // Genuine residues sit within the 16-sample long-CP step plus jitter.
      if (std::abs(u - ref) > max_spread) continue;
      const long j = std::lround((pos - u) / static_cast<double>(sym));
      const long fold = j >= 0 ? j / m_slots : -((-j + m_slots - 1) / m_slots);
      const auto f = static_cast<std::size_t>(j - fold * m_slots);
      // One long CP lies between slot f and slot f + M.
      sum[f] += u - kNrLongCpExtra * static_cast<double>(fold);
      ++count[f];
    }
    for (std::size_t f = 0; f < sum.size(); ++f)
      if (count[f]) v[static_cast<std::size_t>(i)][f] = sum[f] / count[f];
  }

  const auto M = static_cast<std::size_t>(m_slots);
  LongCpResult out;

  out.delta_p.assign(M, -std::numeric_limits<double>::infinity());
  out.variance.assign(M, 0.0);
  for (std::size_t f = 0; f < M; ++f) {
    double acc = 0.0;
    int n = 0;
    std::vector<double> col;
    for (const auto& row : v) {
      if (!std::isnan(row[f])) col.push_back(row[f]);
      const double prev = f == 0 ? row[M - 1] - kNrLongCpExtra : row[f - 1];
      const double next = f + 1 == M ? row[0] + kNrLongCpExtra : row[f + 1];
      if (std::isnan(prev) || std::isnan(next)) continue;
      acc += next - prev;
      ++n;
    }
    if (n) out.delta_p[f] = acc / n;
    if (col.size() >= 2) {
      double mean = 0.0;
      for (double c : col) mean += c;
      mean /= static_cast<double>(col.size());
      double var = 0.0;
      for (double c : col) var += (c - mean) * (c - mean);
      out.variance[f] = var / static_cast<double>(col.size());
    }
  }

  std::vector<std::size_t> order(M);
  for (std::size_t f = 0; f < M; ++f) order[f] = f;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return out.delta_p[a] > out.delta_p[b]; });
  const std::size_t first = order[0];
  const std::size_t second = order[1];
  const std::size_t longest = out.variance[second] > out.variance[first] ? second : first;
  if (!std::isfinite(out.delta_p[longest])) throw Error(ErrorCode::SyncFailure, "no complete slot for the long-CP test");
  out.long_symbol = static_cast<int>(longest);

  std::vector<double> means;
  for (std::size_t f = 0; f < M; ++f) {
    double acc = 0.0;
    int n = 0;
    for (const auto& row : v) {
      if (std::isnan(row[f])) continue;
      acc += f <= longest ? row[f] : row[f] - kNrLongCpExtra;
      ++n;
    }
    if (n) means.push_back(acc / n);
  }
  out.pre_long_residue = dsp::median(means);
  const double idx = out.pre_long_residue + static_cast<double>(longest) * static_cast<double>(sym);
  out.index_long_cp = static_cast<long>(dsp::wrap(static_cast<long long>(std::llround(idx)), half));
  return out;
}

inline LongCpResult find_long_cp(const IqBuffer& y5, int mu) { return find_long_cp(y5.view(), mu); }

/// Every complete symbol of a uniform-CP signal whose CP starts at `p` modulo
/// the symbol length.
inline std::vector<SymbolTiming> uniform_schedule(long p, int n_fft, int n_cp, std::size_t buffer_len) {
  std::vector<SymbolTiming> out;
  const long sym = n_fft + n_cp;
  for (long s = dsp::wrap(static_cast<long long>(p), sym); s + sym <= static_cast<long>(buffer_len); s += sym)
    out.push_back({s, n_cp, false});
  return out;
}

/// Every complete symbol of a 5G normal-CP signal at 30.72 MHz whose long CP
/// starts at `index_long_cp` modulo 15360.
inline std::vector<SymbolTiming> nr_schedule(long index_long_cp, int mu, std::size_t buffer_len) {
  std::vector<SymbolTiming> out;
  const int n_fft = nr_n_fft(mu);
  const int n_short = nr_short_cp(mu);
  const int n_long = nr_long_cp(mu);
  const int m_slots = nr_symbols_per_half_subframe(mu, NrCp::Normal);
  const long len = static_cast<long>(buffer_len);
  for (long h = dsp::wrap(static_cast<long long>(index_long_cp), kNrHalfSubframeSamples) - kNrHalfSubframeSamples;
       h < len; h += kNrHalfSubframeSamples) {
    long s = h;
    for (int t = 0; t < m_slots; ++t) {
      const int n_cp = t == 0 ? n_long : n_short;
      if (s >= 0 && s + n_cp + n_fft <= len) out.push_back({s, n_cp, t == 0});
      s += n_cp + n_fft;
    }
  }
  return out;
}

/// CFO from the CP/body phase rotation, summed over the middle half of the
/// last n_cp_short CP samples of each scheduled symbol. Range (-scs/2, scs/2].
inline double estimate_cfo(std::span<const cplx> y, std::span<const SymbolTiming> schedule, int n_fft, int n_cp_short,
                           double scs_hz) {
  const long lo = n_cp_short / 4;
  const long hi = (3 * n_cp_short + 3) / 4;
  cplx acc{};
  for (const auto& t : schedule) {
    const long base = t.body_start() - n_cp_short;
    for (long i = lo; i <= hi && i < n_cp_short; ++i) {
      const long a = base + i;
      const long b = a + n_fft;
      if (a < 0 || b >= static_cast<long>(y.size())) continue;
      acc += y[static_cast<std::size_t>(b)] * std::conj(y[static_cast<std::size_t>(a)]);
    }
  }
  if (std::abs(acc) == 0.0) throw Error(ErrorCode::ZeroPowerSignal, "no CP energy for CFO estimation");
  return scs_hz * std::arg(acc) / (2.0 * std::numbers::pi);
}

inline double estimate_cfo(const IqBuffer& y, long p, int n_fft, int n_cp, double scs_hz) {
  const auto sched = uniform_schedule(p, n_fft, n_cp, y.size());
  return estimate_cfo(y.view(), sched, n_fft, n_cp, scs_hz);
}

inline IqBuffer correct_cfo(const IqBuffer& y, double cfo_hz) { return dsp::apply_cfo(y, -cfo_hz); }

}  // namespace ofdmsense::features
