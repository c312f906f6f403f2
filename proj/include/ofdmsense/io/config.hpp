#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "ofdmsense/io/json_util.hpp"
#include "ofdmsense/wavegen/impair.hpp"
#include "ofdmsense/wavegen/nr.hpp"
#include "ofdmsense/wavegen/wifi.hpp"

namespace ofdmsense::io {

inline constexpr double kWifiDefaultDurationS = 400e-6;
inline constexpr double kNrDefaultDurationS = 5e-3;

/// One synthesized capture. Wi-Fi fields: t_cp_us. 5G fields: mu, nr_cp,
/// pdsch_bandwidth_mhz, start_offset_samples (downlink samples at 30.72 MHz
/// skipped before the capture begins).
struct SignalConfig {
  Family family = Family::WiFiHT;
  Modulation modulation = Modulation::QPSK;
  double t_cp_us = 0.8;
  int mu = 1;
  NrCp nr_cp = NrCp::Normal;
  double pdsch_bandwidth_mhz = 18.0;
  std::size_t start_offset_samples = 0;
  std::optional<double> duration_s;
  double snr_db = dsp::kNoNoise;
  double cfo_hz = 0.0;
  std::size_t timing_offset_samples = 0;
  double sdr_rate_hz = kCaptureRateHz;
  std::uint64_t seed = 0;

  double duration() const {
    return duration_s.value_or(is_wifi(family) ? kWifiDefaultDurationS : kNrDefaultDurationS);
  }
};

inline std::string to_string(NrCp cp) { return cp == NrCp::Normal ? "normal" : "extended"; }

inline NrCp parse_nr_cp(const std::string& s, const std::string& where) {
  if (s == "normal") return NrCp::Normal;
  if (s == "extended") return NrCp::Extended;
  throw config_error(where + ": field 'nr_cp' must be \"normal\" or \"extended\", got \"" + s + "\"");
}

inline Family parse_family_field(const json& j, const std::string& where) {
  const auto s = field<std::string>(j, "family", where);
  const auto f = parse_family(s);
  if (!f) throw config_error(where + ": field 'family' has unknown value \"" + s + "\"");
  return *f;
}

inline Modulation parse_modulation_value(const std::string& s, const char* key, const std::string& where) {
  const auto m = parse_modulation(s);
  if (!m) throw config_error(where + ": field '" + std::string(key) + "' has unknown value \"" + s + "\"");
  return *m;
}

/// OFDM configuration of a signal config; parameter errors become config errors.
inline OfdmConfig ofdm_config(const SignalConfig& c) {
  try {
    switch (c.family) {
      case Family::WiFiHT: return wifi_ht_config(c.t_cp_us * 1e-6, c.modulation);
      case Family::WiFiHE: return wifi_he_config(c.t_cp_us * 1e-6, c.modulation);
      case Family::NR5G: return nr_config(c.mu, c.nr_cp, c.modulation, c.pdsch_bandwidth_mhz * 1e6);
    }
  } catch (const Error& e) {
    throw config_error(e.detail());
  }
  throw config_error("unknown family");
}

inline void validate(const SignalConfig& c) {
  const auto legal = legal_modulations(c.family);
  if (std::find(legal.begin(), legal.end(), c.modulation) == legal.end())
    throw config_error("field 'modulation': " + std::string(to_string(c.modulation)) + " is not carried by " +
                       std::string(to_string(c.family)));
  (void)ofdm_config(c);
  if (c.duration() < 0.0) throw config_error("field 'duration_s' must be non-negative");
  if (c.sdr_rate_hz < kCaptureRateHz) throw config_error("field 'sdr_rate_hz' must be at least 20 MHz");
  if (std::isnan(c.snr_db)) throw config_error("field 'snr_db' is NaN");
}

inline SignalConfig parse_signal_config(const json& j) {
  const std::string where = "signal config";
  require_known_keys(j,
                     {"schema_version", "family", "modulation", "t_cp_us", "mu", "nr_cp", "pdsch_bandwidth_mhz",
                      "start_offset_samples", "duration_s", "snr_db", "cfo_hz", "timing_offset_samples", "sdr_rate_hz",
                      "seed"},
                     where);
  check_schema_version(j, where);
  SignalConfig c;
  c.family = parse_family_field(j, where);
  c.modulation = parse_modulation_value(field<std::string>(j, "modulation", where), "modulation", where);
  c.t_cp_us = field_or(j, "t_cp_us", c.t_cp_us, where);
  c.mu = field_or(j, "mu", c.mu, where);
  if (j.contains("nr_cp")) c.nr_cp = parse_nr_cp(field<std::string>(j, "nr_cp", where), where);
  c.pdsch_bandwidth_mhz = field_or(j, "pdsch_bandwidth_mhz", c.pdsch_bandwidth_mhz, where);
  c.start_offset_samples = field_or<std::size_t>(j, "start_offset_samples", 0, where);
  if (j.contains("duration_s") && !j["duration_s"].is_null()) c.duration_s = field<double>(j, "duration_s", where);
  c.snr_db = field_or(j, "snr_db", c.snr_db, where);
  c.cfo_hz = field_or(j, "cfo_hz", c.cfo_hz, where);
  c.timing_offset_samples = field_or<std::size_t>(j, "timing_offset_samples", 0, where);
  c.sdr_rate_hz = field_or(j, "sdr_rate_hz", c.sdr_rate_hz, where);
  c.seed = field_or<std::uint64_t>(j, "seed", 0, where);
  validate(c);
  return c;
}

inline json to_json(const SignalConfig& c) {
  json j = {{"schema_version", kSchemaVersion},
            {"family", std::string(to_string(c.family))},
            {"modulation", std::string(to_string(c.modulation))},
            {"duration_s", c.duration()},
            {"snr_db", snr_to_json(c.snr_db)},
            {"cfo_hz", c.cfo_hz},
            {"timing_offset_samples", c.timing_offset_samples},
            {"sdr_rate_hz", c.sdr_rate_hz},
            {"seed", c.seed}};
  if (is_wifi(c.family)) {
    j["t_cp_us"] = c.t_cp_us;
  } else {
    j["mu"] = c.mu;
    j["nr_cp"] = to_string(c.nr_cp);
    j["pdsch_bandwidth_mhz"] = c.pdsch_bandwidth_mhz;
    j["start_offset_samples"] = c.start_offset_samples;
  }
  return j;
}

/// Synthesizes the transmitted frame and runs it through the capture chain,
/// returning the 20 MHz capture.
inline IqBuffer generate_capture(const SignalConfig& c) {
  validate(c);
  const auto cfg = ofdm_config(c);
  const double duration = c.duration();
  IqBuffer tx;
  if (is_wifi(c.family)) {
    tx = wavegen::build_wifi_frame(cfg, wavegen::wifi_symbols_for_duration(cfg, duration), c.seed);
  } else {
    const double lead = static_cast<double>(c.start_offset_samples) / kNrRateHz;
    const auto plan = wavegen::random_channel_plan(cfg, duration + lead, c.seed);
    tx = wavegen::build_5g_frame(cfg, plan, duration + lead, c.seed);
    tx = tx.drop_front(std::min(c.start_offset_samples, tx.size()));
  }
  wavegen::ImpairmentSpec imp;
  imp.snr_db = c.snr_db;
  imp.cfo_hz = c.cfo_hz;
  imp.timing_offset_samples = c.timing_offset_samples;
  imp.sdr_rate_hz = c.sdr_rate_hz;
  imp.seed = CounterRng(c.seed).split(11)();
  return wavegen::impair(tx, imp);
}

}  // namespace ofdmsense::io
