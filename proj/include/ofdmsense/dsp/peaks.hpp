#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "ofdmsense/core/error.hpp"

namespace ofdmsense::dsp {

/// Strict local maxima (endpoints excluded), thinned so that kept peaks are
/// at least `min_distance` apart. Larger peaks win; equal heights keep the
/// smaller index. Result is ascending.
inline std::vector<std::size_t> find_peaks(std::span<const double> mag, std::size_t min_distance) {
  if (min_distance == 0) throw Error(ErrorCode::InvalidArgument, "min_distance must be >= 1");
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < mag.size(); ++i)
    if (mag[i] > mag[i - 1] && mag[i] > mag[i + 1]) cand.push_back(i);
  if (min_distance == 1 || cand.size() < 2) return cand;

  std::vector<std::size_t> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mag[cand[a]] > mag[cand[b]]; });
  std::vector<bool> removed(cand.size(), false);
  for (std::size_t o : order) {
    if (removed[o]) continue;
    const std::size_t pos = cand[o];
    for (std::size_t j = o; j-- > 0 && pos - cand[j] < min_distance;) removed[j] = true;
    for (std::size_t j = o + 1; j < cand.size() && cand[j] - pos < min_distance; ++j) removed[j] = true;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < cand.size(); ++i)
    if (!removed[i]) kept.push_back(cand[i]);
  return kept;
}

}  // namespace ofdmsense::dsp
