#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ofdmsense/dsp/channel.hpp"
#include "ofdmsense/features/histogram.hpp"
#include "ofdmsense/io/json_util.hpp"
#include "ofdmsense/wavegen/ofdm_config.hpp"

namespace ofdmsense::io {

/// One line of manifest.jsonl. Each histogram file gets its own row; an item
/// whose pipeline failed gets a single row with status "failed" and no path.
struct ManifestRow {
  std::size_t item = 0;
  std::string split;  // "train" or "test"
  std::string status = "ok";
  std::optional<std::string> path;  // relative to the dataset directory
  Modulation label = Modulation::QPSK;
  Family family = Family::WiFiHT;
  double scs_hz = 0.0;
  double t_cp_s = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  features::PhaseMode phase_mode = features::PhaseMode::ModQuarterPi;
  int s_bins = 0;
  std::size_t z_total = 0;
  std::string error;

  bool ok() const { return status == "ok"; }
};

inline json to_json(const ManifestRow& r) {
  json j = {{"schema_version", kSchemaVersion},
            {"item", r.item},
            {"split", r.split},
            {"status", r.status},
            {"path", r.path ? json(*r.path) : json(nullptr)},
            {"label", std::string(to_string(r.label))},
            {"family", std::string(to_string(r.family))},
            {"scs_hz", r.scs_hz},
            {"t_cp_s", r.t_cp_s},
            {"snr_db", snr_to_json(r.snr_db)},
            {"seed", r.seed},
            {"phase_mode", std::string(features::to_string(r.phase_mode))},
            {"s_bins", r.s_bins},
            {"z_total", r.z_total}};
  if (!r.ok()) j["error"] = r.error;
  return j;
}

inline ManifestRow manifest_row_from_json(const json& j) {
  ManifestRow r;
  try {
    r.item = j.at("item").get<std::size_t>();
    r.split = j.at("split").get<std::string>();
    r.status = j.at("status").get<std::string>();
    if (!j.at("path").is_null()) r.path = j["path"].get<std::string>();
    const auto label = parse_modulation(j.at("label").get<std::string>());
    const auto family = parse_family(j.at("family").get<std::string>());
    const auto mode = features::parse_phase_mode(j.at("phase_mode").get<std::string>());
    if (!label || !family || !mode) throw Error(ErrorCode::FormatError, "manifest row has an unknown enum value");
    r.label = *label;
    r.family = *family;
    r.phase_mode = *mode;
    r.scs_hz = j.at("scs_hz").get<double>();
    r.t_cp_s = j.at("t_cp_s").get<double>();
    r.snr_db = j.at("snr_db").is_null() ? dsp::kNoNoise : j["snr_db"].get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.s_bins = j.at("s_bins").get<int>();
    r.z_total = j.at("z_total").get<std::size_t>();
    r.error = j.value("error", std::string{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("manifest row: ") + e.what());
  }
  return r;
}

inline std::string manifest_jsonl(const std::vector<ManifestRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += to_json(r).dump() + "\n";
  return out;
}

inline void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  write_text(path, manifest_jsonl(rows));
}

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    rows.push_back(manifest_row_from_json(parse_json(line, path.string() + " line " + std::to_string(n))));
  }
  return rows;
}

}  // namespace ofdmsense::io
