#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>

#include "ofdmsense/features/histogram.hpp"
#include "ofdmsense/io/binary.hpp"
#include "ofdmsense/io/iq_file.hpp"
#include "ofdmsense/io/json_util.hpp"

namespace ofdmsense::io {

/// Dense S x S float32 grid, amplitude bins as rows, plus a `<path>.json` sidecar.
struct HistogramFile {
  features::Histogram2D hist;
  std::optional<std::string> label;
};

inline void write_histogram_file(const std::filesystem::path& path, const features::Histogram2D& h,
                                 const std::optional<std::string>& label = std::nullopt) {
  std::vector<float> v(h.bins.begin(), h.bins.end());
  write_f32le(path, v);
  json side = {{"s_bins", h.s}, {"phase_mode", std::string(features::to_string(h.phase_mode))}, {"z_total", h.z_total}};
  if (label) side["label"] = *label;
  write_text(sidecar_path(path), side.dump(2) + "\n");
}

inline HistogramFile read_histogram_file(const std::filesystem::path& path) {
  const auto where = sidecar_path(path).string();
  const auto side = parse_json(read_text(sidecar_path(path)), where);
  HistogramFile f;
  try {
    f.hist.s = side.at("s_bins").get<int>();
    const auto mode = features::parse_phase_mode(side.at("phase_mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::FormatError, where + ": unknown phase_mode");
    f.hist.phase_mode = *mode;
    f.hist.z_total = side.at("z_total").get<std::size_t>();
    if (side.contains("label")) f.label = side["label"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, where + ": " + e.what());
  }
  if (f.hist.s <= 0) throw Error(ErrorCode::FormatError, where + ": s_bins must be positive");
  const auto values = read_f32le(path);
  const auto expect = static_cast<std::size_t>(f.hist.s) * static_cast<std::size_t>(f.hist.s);
  if (values.size() != expect)
    throw Error(ErrorCode::FormatError, path.string() + ": holds " + std::to_string(values.size()) + " bins, sidecar says " +
                                            std::to_string(expect));
  for (float x : values)
    if (!std::isfinite(x) || x < 0.0f) throw Error(ErrorCode::FormatError, path.string() + ": bins must be finite and non-negative");
  f.hist.bins.assign(values.begin(), values.end());
  return f;
}

}  // namespace ofdmsense::io
