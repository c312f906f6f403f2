#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"

namespace ofdmsense::dsp {

/// One cyclic-autocorrelation estimate at cycle frequency `alpha`
/// (cycles/sample) and lag `lag` (samples).
struct CafValue {
  double alpha = 0.0;
  long lag = 0;
  cplx value{};
};

namespace detail {

// s[n] = sum_{i<l} y[n+i] conj(y[n+i+lag]) for n in [0, L-l-lag].
inline std::vector<cplx> windowed_lag_products(std::span<const cplx> y, std::size_t lag, std::size_t l) {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "window length l must be positive");
  if (y.size() < lag + l + 1)
    throw Error(ErrorCode::InsufficientSamples, "need at least lag + l + 1 samples for the CAF");
  const std::size_t n_prod = y.size() - lag;
  std::vector<cplx> prod(n_prod);
  for (std::size_t m = 0; m < n_prod; ++m) prod[m] = y[m] * std::conj(y[m + lag]);
  const std::size_t n_out = y.size() - l - lag + 1;
  std::vector<cplx> s(n_out);
  // Sliding sum, refreshed periodically so rounding does not accumulate.
  cplx acc{};
  for (std::size_t i = 0; i < l; ++i) acc += prod[i];
  for (std::size_t n = 0; n < n_out; ++n) {
    if (n > 0) {
      if (n % 4096 == 0) {
        acc = {};
        for (std::size_t i = 0; i < l; ++i) acc += prod[n + i];
      } else {
        acc += prod[n + l - 1] - prod[n - 1];
      }
    }
    s[n] = acc;
  }
  return s;
}

inline cplx fourier_coefficient(std::span<const cplx> s, double alpha) {
  cplx acc{};
  if (alpha == 0.0) {
    for (const auto& v : s) acc += v;
  } else {
    for (std::size_t n = 0; n < s.size(); ++n)
      acc += s[n] * std::polar(1.0, -2.0 * std::numbers::pi * alpha * static_cast<double>(n));
  }
  return acc / static_cast<double>(s.size());
}

}  // namespace detail

/// CAF estimate with an l-sample product window:
///   (1/(L-l-lag+1)) sum_n { sum_{i<l} y[n+i] y*[n+i+lag] } e^{-j 2 pi alpha n}.
/// l = 1 gives the classic single-product estimator.
inline CafValue caf_estimate(std::span<const cplx> y, double alpha, std::size_t lag, std::size_t l) {
  const auto s = detail::windowed_lag_products(y, lag, l);
  return {alpha, static_cast<long>(lag), detail::fourier_coefficient(s, alpha)};
}

inline CafValue caf_estimate(const IqBuffer& y, double alpha, std::size_t lag, std::size_t l) {
  return caf_estimate(y.view(), alpha, lag, l);
}

/// CAF at several cycle frequencies sharing one lag; the lag products are
/// formed once.
inline std::vector<CafValue> caf_scan(std::span<const cplx> y, std::span<const double> alphas, std::size_t lag,
                                      std::size_t l) {
  const auto s = detail::windowed_lag_products(y, lag, l);
  std::vector<CafValue> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back({a, static_cast<long>(lag), detail::fourier_coefficient(s, a)});
  return out;
}

/// CP autocorrelation (1/n_cp) sum_{i<n_cp} y[m+i] y*[m+i+n_fft].
inline cplx autocorr_cp(std::span<const cplx> y, std::size_t m, std::size_t n_fft, std::size_t n_cp) {
  if (n_cp == 0) throw Error(ErrorCode::InvalidArgument, "n_cp must be positive");
  if (m + n_cp + n_fft > y.size()) throw Error(ErrorCode::IndexOutOfRange, "CP correlation window past end");
  cplx acc{};
  for (std::size_t i = 0; i < n_cp; ++i) acc += y[m + i] * std::conj(y[m + i + n_fft]);
  return acc / static_cast<double>(n_cp);
}

/// |autocorr_cp(y, m, n_fft, n_cp)| for every m in [0, L - n_fft - n_cp].
inline std::vector<double> autocorr_cp_magnitude(std::span<const cplx> y, std::size_t n_fft, std::size_t n_cp) {
  if (n_cp == 0) throw Error(ErrorCode::InvalidArgument, "n_cp must be positive");
  if (y.size() < n_fft + n_cp) return {};
  const std::size_t n_out = y.size() - n_fft - n_cp + 1;
  std::vector<double> mag(n_out);
  const double inv = 1.0 / static_cast<double>(n_cp);
  auto term = [&](std::size_t i) { return y[i] * std::conj(y[i + n_fft]); };
  cplx acc{};
  for (std::size_t m = 0; m < n_out; ++m) {
    if (m % 4096 == 0) {
      acc = {};
      for (std::size_t i = 0; i < n_cp; ++i) acc += term(m + i);
    } else {
      acc += term(m + n_cp - 1) - term(m - 1);
    }
    mag[m] = std::abs(acc) * inv;
  }
  return mag;
}

}  // namespace ofdmsense::dsp
