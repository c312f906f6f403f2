#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"

namespace ofdmsense {

enum class Modulation { BPSK, QPSK, QAM16, QAM64, QAM256, QAM1024 };

inline constexpr std::array<Modulation, 6> kAllModulations = {
    Modulation::BPSK, Modulation::QPSK, Modulation::QAM16, Modulation::QAM64, Modulation::QAM256, Modulation::QAM1024};

constexpr std::string_view to_string(Modulation m) {
  switch (m) {
    case Modulation::BPSK: return "BPSK";
    case Modulation::QPSK: return "QPSK";
    case Modulation::QAM16: return "QAM16";
    case Modulation::QAM64: return "QAM64";
    case Modulation::QAM256: return "QAM256";
    case Modulation::QAM1024: return "QAM1024";
  }
  return "?";
}

inline std::optional<Modulation> parse_modulation(std::string_view s) {
  for (auto m : kAllModulations)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

constexpr int bits_per_symbol(Modulation m) {
  switch (m) {
    case Modulation::BPSK: return 1;
    case Modulation::QPSK: return 2;
    case Modulation::QAM16: return 4;
    case Modulation::QAM64: return 6;
    case Modulation::QAM256: return 8;
    case Modulation::QAM1024: return 10;
  }
  return 0;
}

namespace detail {

// Gray-decoded amplitude level for `bits` MSB-first bits: 2g - (2^m - 1).
inline int gray_level(unsigned bits, int m) {
  unsigned g = bits;
  for (unsigned shift = 1; shift < static_cast<unsigned>(m); shift <<= 1) g ^= g >> shift;
  return 2 * static_cast<int>(g) - ((1 << m) - 1);
}

}  // namespace detail

/// Constellation point for symbol value `v` (bits MSB-first). BPSK maps 0 to
/// +1 and 1 to -1; square QAM (QPSK = 4-QAM) uses the first half of the bits
/// for I and the second half for Q, Gray-coded per axis, with mean power 1.
inline cplx constellation_point(Modulation m, unsigned v) {
  if (m == Modulation::BPSK) return {v & 1u ? -1.0 : 1.0, 0.0};
  const int half = bits_per_symbol(m) / 2;
  const double order = static_cast<double>(1u << bits_per_symbol(m));
  const double scale = 1.0 / std::sqrt(2.0 * (order - 1.0) / 3.0);
  const unsigned mask = (1u << half) - 1u;
  const int i_level = detail::gray_level((v >> half) & mask, half);
  const int q_level = detail::gray_level(v & mask, half);
  return {scale * i_level, scale * q_level};
}

/// All points, indexed by symbol value.
inline std::vector<cplx> constellation(Modulation m) {
  const unsigned n = 1u << bits_per_symbol(m);
  std::vector<cplx> pts(n);
  for (unsigned v = 0; v < n; ++v) pts[v] = constellation_point(m, v);
  return pts;
}

/// Maps a bit sequence (one bit per element, 0/1) to constellation points.
inline std::vector<cplx> qam_map(std::span<const std::uint8_t> bits, Modulation m) {
  const auto k = static_cast<std::size_t>(bits_per_symbol(m));
  if (bits.size() % k != 0)
    throw Error(ErrorCode::BitLengthMismatch, "bit count " + std::to_string(bits.size()) +
                                                  " is not a multiple of " + std::to_string(k));
  std::vector<cplx> out;
  out.reserve(bits.size() / k);
  for (std::size_t i = 0; i < bits.size(); i += k) {
    unsigned v = 0;
    for (std::size_t b = 0; b < k; ++b) v = (v << 1) | (bits[i + b] & 1u);
    out.push_back(constellation_point(m, v));
  }
  return out;
}

}  // namespace ofdmsense
