#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "ofdmsense/dsp/stats.hpp"
#include "ofdmsense/features/extract.hpp"

namespace ofdmsense::features {

enum class PhaseMode { ModQuarterPi, FullTwoPi };

constexpr std::string_view to_string(PhaseMode m) {
  return m == PhaseMode::ModQuarterPi ? "ModQuarterPi" : "FullTwoPi";
}

inline std::optional<PhaseMode> parse_phase_mode(std::string_view s) {
  if (s == "ModQuarterPi") return PhaseMode::ModQuarterPi;
  if (s == "FullTwoPi") return PhaseMode::FullTwoPi;
  return std::nullopt;
}

inline double phase_period(PhaseMode m) {
  return m == PhaseMode::ModQuarterPi ? std::numbers::pi / 2.0 : 2.0 * std::numbers::pi;
}

inline constexpr int kBinsP = 15;
inline constexpr int kBinsQ = 50;

/// S x S grid; row = amplitude bin, column = phase bin.
struct Histogram2D {
  std::vector<double> bins;
  int s = 0;
  PhaseMode phase_mode = PhaseMode::ModQuarterPi;
  std::size_t z_total = 0;
  std::size_t retained = 0;  // entries at or below the 99th percentile

  double at(int u, int v) const { return bins[static_cast<std::size_t>(u) * static_cast<std::size_t>(s) + static_cast<std::size_t>(v)]; }
  double sum() const {
    double acc = 0.0;
    for (double b : bins) acc += b;
    return acc;
  }
};

// Relative slack so rounding noise does not move lattice points across an edge.
inline constexpr double kEdgeSlack = 1e-9;

/// Amplitude normalised by the 99th percentile in [0, 1], or nullopt when discarded.
inline std::optional<double> amplitude_coordinate(double amp, double p99) {
  if (p99 <= 0.0) return amp <= 0.0 ? std::optional<double>(0.0) : std::nullopt;
  if (amp > p99 * (1.0 + kEdgeSlack)) return std::nullopt;
  return std::min(amp / p99, 1.0);
}

/// Phase difference modulo the axis period, as a fraction in [0, 1).
inline double phase_coordinate(double phase, PhaseMode mode) {
  const double period = phase_period(mode);
  const double x = dsp::wrap(phase, period) / period;
  return x >= 1.0 - kEdgeSlack ? 0.0 : x;
}

inline int bin_index(double x, int s) { return std::clamp(static_cast<int>(std::floor(x * s)), 0, s - 1); }

inline Histogram2D build_histogram(const FeatureSet& f, int s_bins, PhaseMode mode) {
  if (f.entries.empty()) throw Error(ErrorCode::EmptyFeatureSet, "no features to bin");
  if (s_bins <= 0) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");
  std::vector<double> amps;
  amps.reserve(f.entries.size());
  for (const auto& e : f.entries) amps.push_back(e.amplitude);
  const double p99 = dsp::percentile(amps, 99.0);

  Histogram2D h;
  h.s = s_bins;
  h.phase_mode = mode;
  h.z_total = f.entries.size();
  h.bins.assign(static_cast<std::size_t>(s_bins) * static_cast<std::size_t>(s_bins), 0.0);
  std::vector<std::size_t> counts(h.bins.size(), 0);
  for (const auto& e : f.entries) {
    const auto a = amplitude_coordinate(e.amplitude, p99);
    if (!a) continue;
    const int u = bin_index(*a, s_bins);
    const int v = bin_index(phase_coordinate(e.phase_diff, mode), s_bins);
    ++h.retained;
    ++counts[static_cast<std::size_t>(u) * static_cast<std::size_t>(s_bins) + static_cast<std::size_t>(v)];
  }
  const double z = static_cast<double>(h.z_total);
  for (std::size_t i = 0; i < counts.size(); ++i) h.bins[i] = static_cast<double>(counts[i]) / z;
  return h;
}

}  // namespace ofdmsense::features
