#pragma once

#include <filesystem>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/io/binary.hpp"
#include "ofdmsense/io/json_util.hpp"

namespace ofdmsense::io {

/// Interleaved I/Q float32 samples plus a `<path>.json` sidecar.
struct IqFile {
  IqBuffer iq;
  std::uint64_t seed = 0;
  json config;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

inline void write_iq_file(const std::filesystem::path& path, const IqBuffer& iq, std::uint64_t seed,
                          const json& config) {
  std::vector<float> interleaved;
  interleaved.reserve(iq.size() * 2);
  for (const auto& s : iq.samples) {
    interleaved.push_back(static_cast<float>(s.real()));
    interleaved.push_back(static_cast<float>(s.imag()));
  }
  write_f32le(path, interleaved);
  json side = {{"sample_rate_hz", iq.sample_rate_hz}, {"seed", seed}, {"config", config}};
  write_text(sidecar_path(path), side.dump(2) + "\n");
}

inline IqFile read_iq_file(const std::filesystem::path& path) {
  const auto side = parse_json(read_text(sidecar_path(path)), sidecar_path(path).string());
  if (!side.contains("sample_rate_hz") || !side["sample_rate_hz"].is_number())
    throw Error(ErrorCode::FormatError, sidecar_path(path).string() + ": missing sample_rate_hz");
  const auto values = read_f32le(path);
  if (values.size() % 2 != 0) throw Error(ErrorCode::FormatError, path.string() + ": odd number of float32 values");
  IqFile f;
  f.iq.sample_rate_hz = side["sample_rate_hz"].get<double>();
  f.iq.samples.resize(values.size() / 2);
  for (std::size_t i = 0; i < f.iq.samples.size(); ++i) f.iq.samples[i] = {values[2 * i], values[2 * i + 1]};
  f.seed = side.value("seed", std::uint64_t{0});
  f.config = side.value("config", json::object());
  return f;
}

}  // namespace ofdmsense::io
