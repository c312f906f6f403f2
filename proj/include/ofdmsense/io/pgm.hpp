#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "ofdmsense/features/histogram.hpp"
#include "ofdmsense/io/json_util.hpp"

namespace ofdmsense::io {

/// Binary greyscale image of a histogram: one pixel per bin, amplitude bin
/// u on row u, values scaled so the largest bin is 255.
inline std::string render_pgm(const features::Histogram2D& h) {
  if (h.s <= 0 || h.bins.size() != static_cast<std::size_t>(h.s) * static_cast<std::size_t>(h.s))
    throw Error(ErrorCode::FormatError, "histogram grid is not S x S");
  const double peak = *std::max_element(h.bins.begin(), h.bins.end());
  std::string out = "P5\n" + std::to_string(h.s) + " " + std::to_string(h.s) + "\n255\n";
  for (double b : h.bins) {
    const long v = peak > 0.0 ? std::lround(255.0 * b / peak) : 0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(v, 0L, 255L))));
  }
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const features::Histogram2D& h) { write_text(path, render_pgm(h)); }

}  // namespace ofdmsense::io
