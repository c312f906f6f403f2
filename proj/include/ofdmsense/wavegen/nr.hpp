#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/core/rng.hpp"
#include "ofdmsense/dsp/fft.hpp"
#include "ofdmsense/wavegen/modulation.hpp"
#include "ofdmsense/wavegen/ofdm_config.hpp"
#include "ofdmsense/wavegen/wifi.hpp"

namespace ofdmsense::wavegen {

enum class PhyChannel { PDSCH, PDCCH, CSIRS, PBCH, PSS, SSS, DMRS, PTRS };

constexpr std::string_view to_string(PhyChannel c) {
  switch (c) {
    case PhyChannel::PDSCH: return "PDSCH";
    case PhyChannel::PDCCH: return "PDCCH";
    case PhyChannel::CSIRS: return "CSIRS";
    case PhyChannel::PBCH: return "PBCH";
    case PhyChannel::PSS: return "PSS";
    case PhyChannel::SSS: return "SSS";
    case PhyChannel::DMRS: return "DMRS";
    case PhyChannel::PTRS: return "PTRS";
  }
  return "?";
}

/// Fixed modulation of every non-PDSCH channel.
constexpr Modulation control_modulation(PhyChannel c) {
  return (c == PhyChannel::PSS || c == PhyChannel::SSS) ? Modulation::BPSK : Modulation::QPSK;
}

struct ResourceElement {
  int symbol = 0;      // OFDM symbol index from the start of the frame
  int subcarrier = 0;  // signed index in [-n_fft/2, n_fft/2)
};

struct PhyChannelSpec {
  PhyChannel channel = PhyChannel::PDSCH;
  Modulation modulation = Modulation::QPSK;
  std::vector<ResourceElement> allocation;
};

/// Start sample and CP length of symbol `t` at the TX rate.
struct SymbolSlot {
  std::size_t start = 0;
  int n_cp = 0;
};

inline SymbolSlot nr_symbol_slot(const OfdmConfig& cfg, std::size_t t) {
  if (const auto* lc = std::get_if<NormalWithLongCp>(&cfg.cp_profile)) {
    const auto m = static_cast<std::size_t>(lc->long_period_symbols);
    const std::size_t half = t / m;
    const std::size_t within = t % m;
    const auto period = static_cast<std::size_t>(lc->long_period_symbols * (cfg.n_fft + lc->n_cp_short) +
                                                  (lc->n_cp_long - lc->n_cp_short));
    std::size_t start = half * period;
    if (within > 0)
      start += static_cast<std::size_t>(cfg.n_fft + lc->n_cp_long) +
               (within - 1) * static_cast<std::size_t>(cfg.n_fft + lc->n_cp_short);
    return {start, within == 0 ? lc->n_cp_long : lc->n_cp_short};
  }
  return {t * static_cast<std::size_t>(cfg.symbol_length()), cfg.n_cp()};
}

/// Number of symbols whose start lies before round(duration * rate).
inline std::size_t nr_symbol_count(const OfdmConfig& cfg, double duration_s) {
  const auto total = static_cast<std::size_t>(std::llround(duration_s * cfg.tx_rate_hz));
  std::size_t t = 0;
  while (nr_symbol_slot(cfg, t).start < total) ++t;
  return t;
}

namespace detail {

inline int symbols_per_slot(const OfdmConfig& cfg) { return has_long_cp(cfg.cp_profile) ? 14 : 12; }

class ReGrid {
 public:
  ReGrid(int n_symbols, int n_fft) : n_fft_(n_fft), n_symbols_(n_symbols),
        owner_(static_cast<std::size_t>(n_symbols) * static_cast<std::size_t>(n_fft), -1) {}
  int& at(int symbol, int subcarrier) {
    return owner_[static_cast<std::size_t>(symbol) * static_cast<std::size_t>(n_fft_) + dsp::bin_of(subcarrier, static_cast<std::size_t>(n_fft_))];
  }
  bool in_range(const ResourceElement& re) const {
    return re.symbol >= 0 && re.symbol < n_symbols_ && re.subcarrier >= -n_fft_ / 2 && re.subcarrier < n_fft_ / 2;
  }
 private:
  int n_fft_;
  int n_symbols_;
  std::vector<int> owner_;
};

}  // namespace detail

/// Randomised allocation of every downlink channel over `duration_s`:
///  - PSS/SSS/PBCH: 240-subcarrier block in symbols 0-3 of slot 0 (mu 0 and 1 only);
///  - PDCCH: per slot, start symbol 0-2, 1-2 symbols, one contiguous RB block;
///  - DMRS: comb-2 over the PDSCH band on two symbols per slot;
///  - PTRS: one subcarrier every 4th RB on the remaining data symbols;
///  - CSI-RS: ~1% of the free REs, chosen at random;
///  - PDSCH: every remaining RE of the PDSCH band.
inline std::vector<PhyChannelSpec> random_channel_plan(const OfdmConfig& cfg, double duration_s, std::uint64_t seed) {
  if (cfg.family != Family::NR5G) throw Error(ErrorCode::ConfigMismatch, "channel plans are 5G only");
  CounterRng rng = CounterRng(seed).split(7);
  const int n_sym = static_cast<int>(nr_symbol_count(cfg, duration_s));
  const int per_slot = detail::symbols_per_slot(cfg);
  const int mu = cfg.mu();
  const int k_lo = *std::min_element(cfg.occupied_subcarriers.begin(), cfg.occupied_subcarriers.end());
  const int k_hi = *std::max_element(cfg.occupied_subcarriers.begin(), cfg.occupied_subcarriers.end());
  const int n_rb = (k_hi - k_lo + 1) / 12;

  detail::ReGrid taken(std::max(n_sym, 1), cfg.n_fft);
  std::vector<PhyChannelSpec> plan;
  auto channel = [&](PhyChannel c) -> PhyChannelSpec& {
    for (auto& p : plan)
      if (p.channel == c) return p;
    plan.push_back({c, c == PhyChannel::PDSCH ? cfg.modulation : control_modulation(c), {}});
    return plan.back();
  };
  auto claim = [&](PhyChannel c, int s, int k) {
    if (s >= n_sym || k < k_lo || k > k_hi) return;
    int& owner = taken.at(s, k);
    if (owner >= 0) return;
    owner = static_cast<int>(c);
    channel(c).allocation.push_back({s, k});
  };

  if (mu <= 1 && n_sym >= 4 && n_rb >= 20) {
    const int block_lo = k_lo + 12 * static_cast<int>(rng.uniform_int(0, n_rb - 20));
    for (int s = 0; s < 4; ++s) {
      for (int i = 0; i < 240; ++i) {
        const int k = block_lo + i;
        const bool sync_band = i >= 56 && i < 183;
        if (s == 0) {
          if (sync_band) claim(PhyChannel::PSS, s, k);
        } else if (s == 2) {
          if (sync_band) claim(PhyChannel::SSS, s, k);
          else if (i < 48 || i >= 192) claim(PhyChannel::PBCH, s, k);
        } else {
          claim(PhyChannel::PBCH, s, k);
        }
        // Unused REs inside the SS block stay empty.
        if (s < n_sym && k >= k_lo && k <= k_hi && taken.at(s, k) < 0) taken.at(s, k) = 255;
      }
    }
  }

  const int n_slots = (n_sym + per_slot - 1) / per_slot;
  const int dmrs_a = 4;
  const int dmrs_b = per_slot == 14 ? 11 : 10;
  for (int slot = 0; slot < n_slots; ++slot) {
    const int base = slot * per_slot;
    const int start = static_cast<int>(rng.uniform_int(0, 2));
    const int len = static_cast<int>(rng.uniform_int(1, 2));
    const int rbs = static_cast<int>(rng.uniform_int(std::min(6, n_rb), std::min(48, n_rb)));
    const int rb0 = static_cast<int>(rng.uniform_int(0, n_rb - rbs));
    for (int s = base + start; s < base + start + len; ++s)
      for (int k = k_lo + 12 * rb0; k < k_lo + 12 * (rb0 + rbs); ++k) claim(PhyChannel::PDCCH, s, k);
    for (int s : {base + dmrs_a, base + dmrs_b})
      for (int k = k_lo; k <= k_hi; k += 2) claim(PhyChannel::DMRS, s, k);
    for (int s = base + dmrs_a + 1; s < base + per_slot; ++s) {
      if (s == base + dmrs_b) continue;
      for (int rb = 0; rb < n_rb; rb += 4) claim(PhyChannel::PTRS, s, k_lo + 12 * rb + 1);
    }
  }

  for (int s = 0; s < n_sym; ++s) {
    if (s % per_slot <= dmrs_a) continue;
    for (int k = k_lo; k <= k_hi; ++k)
      if (taken.at(s, k) < 0 && rng.uniform() < 0.01) claim(PhyChannel::CSIRS, s, k);
  }

  for (int s = 0; s < n_sym; ++s)
    for (int k = k_lo; k <= k_hi; ++k) claim(PhyChannel::PDSCH, s, k);
  return plan;
}

/// 5G downlink samples at the TX rate for `duration_s`. Each channel's REs
/// carry uniformly random points of its modulation; other REs are zero.
inline GeneratedFrame generate_5g_frame(const OfdmConfig& cfg, const std::vector<PhyChannelSpec>& channels,
                                        double duration_s, std::uint64_t seed) {
  if (cfg.family != Family::NR5G) throw Error(ErrorCode::ConfigMismatch, "generate_5g_frame needs a 5G config");
  validate(cfg);
  if (std::abs(cfg.tx_rate_hz - kNrRateHz) > 1.0) throw Error(ErrorCode::ConfigMismatch, "5G TX rate must be 30.72 MHz");

  const auto total = static_cast<std::size_t>(std::llround(std::max(0.0, duration_s) * cfg.tx_rate_hz));
  const int n_sym = static_cast<int>(nr_symbol_count(cfg, duration_s));
  const auto n = static_cast<std::size_t>(cfg.n_fft);

  GeneratedFrame f;
  f.iq.sample_rate_hz = cfg.tx_rate_hz;
  f.grid.assign(static_cast<std::size_t>(n_sym), std::vector<cplx>(n));

  detail::ReGrid owner(std::max(n_sym, 1), cfg.n_fft);
  CounterRng data_rng = CounterRng(seed).split(2);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    if (ch.channel == PhyChannel::PDSCH) {
      if (ch.modulation != cfg.modulation) throw Error(ErrorCode::ConfigMismatch, "PDSCH modulation differs from config");
    } else if (ch.modulation != Modulation::BPSK && ch.modulation != Modulation::QPSK) {
      throw Error(ErrorCode::ConfigMismatch, std::string(to_string(ch.channel)) + " must use BPSK or QPSK");
    }
    const auto points = constellation(ch.modulation);
    for (const auto& re : ch.allocation) {
      if (re.symbol >= n_sym) continue;
      if (!owner.in_range(re)) throw Error(ErrorCode::IndexOutOfRange, "resource element outside the grid");
      int& o = owner.at(re.symbol, re.subcarrier);
      if (o >= 0)
        throw Error(ErrorCode::AllocationConflict,
                    std::string(to_string(ch.channel)) + " overlaps " +
                        std::string(to_string(channels[static_cast<std::size_t>(o)].channel)) + " at symbol " +
                        std::to_string(re.symbol) + ", subcarrier " + std::to_string(re.subcarrier));
      o = static_cast<int>(c);
      f.grid[static_cast<std::size_t>(re.symbol)][dsp::bin_of(re.subcarrier, n)] =
          points[static_cast<std::size_t>(data_rng.uniform_int(0, static_cast<std::int64_t>(points.size()) - 1))];
    }
  }

  f.iq.samples.reserve(total + n + 256);
  for (int t = 0; t < n_sym; ++t) {
    const auto slot = nr_symbol_slot(cfg, static_cast<std::size_t>(t));
    f.symbol_starts.push_back(slot.start);
    f.cp_lengths.push_back(slot.n_cp);
    detail::append_symbol(f.iq.samples, f.grid[static_cast<std::size_t>(t)], slot.n_cp);
  }
  f.iq.samples.resize(total);
  return f;
}

inline IqBuffer build_5g_frame(const OfdmConfig& cfg, const std::vector<PhyChannelSpec>& channels, double duration_s,
                               std::uint64_t seed) {
  return generate_5g_frame(cfg, channels, duration_s, seed).iq;
}

}  // namespace ofdmsense::wavegen
