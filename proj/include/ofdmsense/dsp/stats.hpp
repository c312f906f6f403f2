#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "ofdmsense/core/error.hpp"

namespace ofdmsense::dsp {

/// Percentile (0..100) by linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of empty sequence");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// Lower median (element at index (n-1)/2 of the sorted sequence).
template <typename T>
T lower_median(std::vector<T> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of empty sequence");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

/// Interpolated median (mean of the two middle elements for even counts).
inline double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of empty sequence");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// x mod period in [0, period).
inline double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  return r >= period ? 0.0 : r;
}

inline long long wrap(long long x, long long period) {
  const long long r = x % period;
  return r < 0 ? r + period : r;
}

/// x mod period in [-period/2, period/2).
inline double wrap_centered(double x, double period) {
  return wrap(x + period / 2.0, period) - period / 2.0;
}

/// Circular mean position of residues modulo `period`.
inline double circular_mean(std::span<const double> residues, double period) {
  std::complex<double> acc{};
  for (double r : residues) acc += std::polar(1.0, 2.0 * std::numbers::pi * r / period);
  if (std::abs(acc) == 0.0) return 0.0;
  return wrap(std::arg(acc) / (2.0 * std::numbers::pi) * period, period);
}

/// Median of residues modulo `period`, taken on the arc centred at their
/// circular mean so a cluster straddling 0 is not split.
inline long long circular_median(std::span<const long long> residues, long long period) {
  if (residues.empty()) throw Error(ErrorCode::InvalidArgument, "median of empty sequence");
  std::vector<double> as_double(residues.begin(), residues.end());
  const double p = static_cast<double>(period);
  const double ref = circular_mean(as_double, p);
  std::vector<double> centred;
  centred.reserve(residues.size());
  for (double r : as_double) centred.push_back(ref + wrap_centered(r - ref, p));
  const double m = lower_median(centred);
  return wrap(static_cast<long long>(std::llround(m)), period);
}

}  // namespace ofdmsense::dsp
