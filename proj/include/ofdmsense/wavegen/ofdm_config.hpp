#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ofdmsense/core/error.hpp"
#include "ofdmsense/wavegen/modulation.hpp"

namespace ofdmsense {

enum class Family { WiFiHT, WiFiHE, NR5G };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::WiFiHT: return "WiFiHT";
    case Family::WiFiHE: return "WiFiHE";
    case Family::NR5G: return "NR5G";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  for (auto f : {Family::WiFiHT, Family::WiFiHE, Family::NR5G})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

constexpr bool is_wifi(Family f) { return f != Family::NR5G; }

enum class NrCp { Normal, Extended };

inline constexpr double kWifiRateHz = 20e6;   // Wi-Fi TX rate and the capture (processing) rate
inline constexpr double kCaptureRateHz = 20e6;
inline constexpr double kNrRateHz = 30.72e6;
inline constexpr long kNrHalfSubframeSamples = 15360;  // 0.5 ms at 30.72 MHz
inline constexpr int kNrLongCpExtra = 16;              // long minus short CP at 30.72 MHz

struct UniformCp {
  int n_cp = 0;
};

/// 5G normal CP: the first symbol of every 0.5 ms carries the long CP.
struct NormalWithLongCp {
  int n_cp_short = 0;
  int n_cp_long = 0;
  int long_period_symbols = 0;
};

using CpProfile = std::variant<UniformCp, NormalWithLongCp>;

inline int short_cp(const CpProfile& cp) {
  return std::visit([](const auto& c) {
    if constexpr (std::is_same_v<std::decay_t<decltype(c)>, UniformCp>) return c.n_cp;
    else return c.n_cp_short;
  }, cp);
}

inline bool has_long_cp(const CpProfile& cp) { return std::holds_alternative<NormalWithLongCp>(cp); }

struct OfdmConfig {
  Family family = Family::WiFiHT;
  double scs_hz = 0.0;
  double tx_rate_hz = 0.0;
  int n_fft = 0;
  CpProfile cp_profile = UniformCp{};
  Modulation modulation = Modulation::QPSK;
  std::vector<int> occupied_subcarriers;  // signed indices in [-n_fft/2, n_fft/2)
  std::vector<int> pilot_subcarriers;     // Wi-Fi only; subset of occupied, BPSK
  int n_null = 0;

  int n_cp() const { return short_cp(cp_profile); }
  int symbol_length() const { return n_fft + n_cp(); }
  double t_ifft_s() const { return 1.0 / scs_hz; }
  double t_cp_s() const { return n_cp() / tx_rate_hz; }
  /// 5G numerology: scs = 15 kHz * 2^mu.
  int mu() const { return static_cast<int>(std::lround(std::log2(scs_hz / 15e3))); }
};

/// Modulations a family may carry on its classified payload.
inline std::vector<Modulation> legal_modulations(Family f) {
  switch (f) {
    case Family::WiFiHT: return {Modulation::BPSK, Modulation::QPSK, Modulation::QAM16, Modulation::QAM64};
    case Family::WiFiHE: return {kAllModulations.begin(), kAllModulations.end()};
    case Family::NR5G:
      return {Modulation::QPSK, Modulation::QAM16, Modulation::QAM64, Modulation::QAM256, Modulation::QAM1024};
  }
  return {};
}

/// Legal CP durations (seconds) for the Wi-Fi formats.
inline std::vector<double> wifi_cp_options(Family f) {
  if (f == Family::WiFiHT) return {0.4e-6, 0.8e-6};
  if (f == Family::WiFiHE) return {0.8e-6, 1.6e-6, 3.2e-6};
  throw Error(ErrorCode::UnknownFamily, "not a Wi-Fi family");
}

/// Short/long CP sample counts at 30.72 MHz.
inline int nr_short_cp(int mu) { return 144 >> mu; }
inline int nr_long_cp(int mu) { return nr_short_cp(mu) + kNrLongCpExtra; }
inline int nr_extended_cp() { return 128; }
inline int nr_n_fft(int mu) { return 2048 >> mu; }
inline int nr_symbols_per_half_subframe(int mu, NrCp cp) { return (cp == NrCp::Normal ? 7 : 6) << mu; }

inline void validate(const OfdmConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigMismatch, m); };
  if (cfg.n_fft <= 0 || cfg.scs_hz <= 0.0) fail("n_fft and scs_hz must be positive");
  if (std::abs(cfg.n_fft * cfg.scs_hz - cfg.tx_rate_hz) > 1e-6 * cfg.tx_rate_hz)
    fail("n_fft * scs_hz must equal tx_rate_hz");
  for (int k : cfg.occupied_subcarriers)
    if (k < -cfg.n_fft / 2 || k >= cfg.n_fft / 2) fail("occupied subcarrier out of range");
  if (is_wifi(cfg.family)) {
    if (std::find(cfg.occupied_subcarriers.begin(), cfg.occupied_subcarriers.end(), 0) !=
        cfg.occupied_subcarriers.end())
      fail("Wi-Fi occupancy must exclude DC");
    if (has_long_cp(cfg.cp_profile)) fail("Wi-Fi uses a uniform CP");
  }
  if (const auto* lc = std::get_if<NormalWithLongCp>(&cfg.cp_profile)) {
    if (cfg.family != Family::NR5G) fail("long CP only exists for 5G");
    const int mu = cfg.mu();
    if (lc->long_period_symbols != (7 << mu)) fail("long CP period must be 7*2^mu symbols");
    if (std::abs(cfg.tx_rate_hz - kNrRateHz) < 1.0 && lc->n_cp_long - lc->n_cp_short != kNrLongCpExtra)
      fail("long CP must exceed the short CP by 16 samples at 30.72 MHz");
  }
}

/// Wi-Fi HT payload: 64-point FFT, 52 data + 4 pilot subcarriers.
inline OfdmConfig wifi_ht_config(double t_cp_s, Modulation m) {
  OfdmConfig cfg;
  cfg.family = Family::WiFiHT;
  cfg.tx_rate_hz = kWifiRateHz;
  cfg.n_fft = 64;
  cfg.scs_hz = kWifiRateHz / 64;
  const int n_cp = static_cast<int>(std::lround(t_cp_s * kWifiRateHz));
  if (n_cp != 8 && n_cp != 16) throw Error(ErrorCode::ConfigMismatch, "HT CP must be 0.4 or 0.8 us");
  cfg.cp_profile = UniformCp{n_cp};
  if (m == Modulation::QAM256 || m == Modulation::QAM1024)
    throw Error(ErrorCode::ConfigMismatch, "HT carries at most 64QAM");
  cfg.modulation = m;
  for (int k = -28; k <= 28; ++k)
    if (k != 0) cfg.occupied_subcarriers.push_back(k);
  cfg.pilot_subcarriers = {-21, -7, 7, 21};
  cfg.n_null = 8;
  return cfg;
}

/// Wi-Fi HE 20 MHz SU payload: 256-point FFT, 234 data + 8 pilot subcarriers.
inline OfdmConfig wifi_he_config(double t_cp_s, Modulation m) {
  OfdmConfig cfg;
  cfg.family = Family::WiFiHE;
  cfg.tx_rate_hz = kWifiRateHz;
  cfg.n_fft = 256;
  cfg.scs_hz = kWifiRateHz / 256;
  const int n_cp = static_cast<int>(std::lround(t_cp_s * kWifiRateHz));
  if (n_cp != 16 && n_cp != 32 && n_cp != 64) throw Error(ErrorCode::ConfigMismatch, "HE CP must be 0.8, 1.6 or 3.2 us");
  cfg.cp_profile = UniformCp{n_cp};
  cfg.modulation = m;
  for (int k = -122; k <= 122; ++k)
    if (std::abs(k) >= 2) cfg.occupied_subcarriers.push_back(k);
  cfg.pilot_subcarriers = {-116, -90, -48, -22, 22, 48, 90, 116};
  cfg.n_null = 32;
  return cfg;
}

/// 5G downlink at 30.72 MHz; the PDSCH occupies a centred band of whole
/// resource blocks no wider than `pdsch_bandwidth_hz`.
inline OfdmConfig nr_config(int mu, NrCp cp, Modulation m, double pdsch_bandwidth_hz = 18e6) {
  if (mu < 0 || mu > 2) throw Error(ErrorCode::ConfigMismatch, "mu must be 0, 1 or 2");
  if (cp == NrCp::Extended && mu != 2) throw Error(ErrorCode::ConfigMismatch, "extended CP is only defined for 60 kHz");
  if (m == Modulation::BPSK) throw Error(ErrorCode::ConfigMismatch, "PDSCH does not use BPSK");
  OfdmConfig cfg;
  cfg.family = Family::NR5G;
  cfg.tx_rate_hz = kNrRateHz;
  cfg.scs_hz = 15e3 * (1 << mu);
  cfg.n_fft = nr_n_fft(mu);
  if (cp == NrCp::Normal)
    cfg.cp_profile = NormalWithLongCp{nr_short_cp(mu), nr_long_cp(mu), 7 << mu};
  else
    cfg.cp_profile = UniformCp{nr_extended_cp()};
  cfg.modulation = m;
  const int n_rb = static_cast<int>(std::floor(pdsch_bandwidth_hz / (12.0 * cfg.scs_hz)));
  if (n_rb < 1 || 12 * n_rb > cfg.n_fft) throw Error(ErrorCode::ConfigMismatch, "PDSCH bandwidth out of range");
  for (int k = -6 * n_rb; k < 6 * n_rb; ++k) cfg.occupied_subcarriers.push_back(k);
  return cfg;
}

}  // namespace ofdmsense
