#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/dsp/caf.hpp"
#include "ofdmsense/wavegen/ofdm_config.hpp"

namespace ofdmsense::estimator {

/// IFFT lengths at 20 MHz for HT, HE and 5G mu = 2, 1, 0.
inline constexpr std::array<std::size_t, 5> kLagCandidates = {64, 256, 333, 667, 1333};

/// Three of the longest symbols (5G mu = 0 with long CP) at 20 MHz.
inline constexpr std::size_t kMinEstimateSamples = 4313;

struct ParamEstimate {
  std::size_t ell_star = 0;
  double t_ifft_s = 0.0;
  std::optional<double> t_cp_s;
  Family family = Family::WiFiHT;
  int mu = -1;                  // 5G numerology, -1 for Wi-Fi
  std::optional<NrCp> nr_cp;    // set once the 5G CP option is decided
  std::map<std::size_t, double> caf_scores;  // lag -> |CAF(0, lag)|
  std::map<double, double> cp_scores;        // candidate T_CP -> |CAF(alpha, ell_star)|
  double margin_db = 0.0;       // best over runner-up IFFT score

  /// CP samples at `rate_hz` for the decided CP (short CP for 5G normal).
  int n_cp_at(double rate_hz) const { return t_cp_s ? static_cast<int>(std::lround(*t_cp_s * rate_hz)) : 0; }
};

/// One T_CP hypothesis: the cycle frequency of its symbol grid at 20 MHz.
struct CpCandidate {
  double t_cp_s = 0.0;
  double alpha = 0.0;
  std::optional<NrCp> nr_cp;
};

inline Family family_of_lag(std::size_t lag, int& mu) {
  switch (lag) {
    case 64: mu = -1; return Family::WiFiHT;
    case 256: mu = -1; return Family::WiFiHE;
    case 333: mu = 2; return Family::NR5G;
    case 667: mu = 1; return Family::NR5G;
    case 1333: mu = 0; return Family::NR5G;
    default: throw Error(ErrorCode::UnknownFamily, "lag " + std::to_string(lag) + " is not a candidate");
  }
}

/// CP hypotheses for a decided IFFT length. Wi-Fi candidates use
/// alpha = 1/(lag + 20e6 * T_CP). 5G candidates use the exact symbol rate of
/// the 0.5 ms grid at 20 MHz (28 or 24 symbols per 10000 samples at 60 kHz).
inline std::vector<CpCandidate> cp_candidates(Family family, int mu, std::size_t lag) {
  std::vector<CpCandidate> out;
  if (is_wifi(family)) {
    for (double t : wifi_cp_options(family))
      out.push_back({t, 1.0 / (static_cast<double>(lag) + kCaptureRateHz * t), std::nullopt});
    return out;
  }
  if (mu < 0 || mu > 2) throw Error(ErrorCode::UnknownFamily, "no 5G numerology " + std::to_string(mu));
  const double per_half = kCaptureRateHz * 0.5e-3;
  out.push_back({nr_short_cp(mu) / kNrRateHz, nr_symbols_per_half_subframe(mu, NrCp::Normal) / per_half, NrCp::Normal});
  if (mu == 2)
    out.push_back({nr_extended_cp() / kNrRateHz, nr_symbols_per_half_subframe(mu, NrCp::Extended) / per_half,
                   NrCp::Extended});
  return out;
}

/// IFFT duration by the largest |CAF(0, lag)| over kLagCandidates
/// (ties keep the smaller lag). `y` must be at 20 MHz.
inline ParamEstimate estimate_t_ifft(const IqBuffer& y, std::size_t l = 8) {
  if (std::abs(y.sample_rate_hz - kCaptureRateHz) > 1.0)
    throw Error(ErrorCode::ConfigMismatch, "parameter estimation expects a 20 MHz capture");
  if (y.size() < kMinEstimateSamples)
    throw Error(ErrorCode::InsufficientSamples, "parameter estimation needs at least " +
                                                    std::to_string(kMinEstimateSamples) + " samples");
  ParamEstimate est;
  double best = -1.0, second = -1.0;
  for (std::size_t lag : kLagCandidates) {
    const double score = std::abs(dsp::caf_estimate(y, 0.0, lag, l).value);
    est.caf_scores[lag] = score;
    if (score > best) {
      second = best;
      best = score;
      est.ell_star = lag;
    } else if (score > second) {
      second = score;
    }
  }
  est.family = family_of_lag(est.ell_star, est.mu);
  // Nominal 1/scs: the 5G lags are the IFFT durations rounded to 20 MHz samples.
  est.t_ifft_s = is_wifi(est.family) ? static_cast<double>(est.ell_star) / kCaptureRateHz : 1.0 / (15e3 * (1 << est.mu));
  est.margin_db = second > 0.0 ? 20.0 * std::log10(best / second) : INFINITY;
  return est;
}

/// CP duration by the largest |CAF(alpha, ell_star)| over the family's CP
/// hypotheses; single-hypothesis families return it without a search.
inline ParamEstimate estimate_t_cp(const IqBuffer& y, ParamEstimate est, std::size_t l = 8) {
  const auto cands = cp_candidates(est.family, est.mu, est.ell_star);
  if (cands.empty()) throw Error(ErrorCode::UnknownFamily, "no CP options for this family");
  if (cands.size() == 1) {
    est.t_cp_s = cands.front().t_cp_s;
    est.nr_cp = cands.front().nr_cp;
    return est;
  }
  std::vector<double> alphas;
  for (const auto& c : cands) alphas.push_back(c.alpha);
  const auto values = dsp::caf_scan(y.view(), alphas, est.ell_star, l);
  std::size_t best = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double score = std::abs(values[i].value);
    est.cp_scores[cands[i].t_cp_s] = score;
    if (score > std::abs(values[best].value)) best = i;
  }
  est.t_cp_s = cands[best].t_cp_s;
  est.nr_cp = cands[best].nr_cp;
  return est;
}

inline ParamEstimate estimate_params(const IqBuffer& y, std::size_t l = 8) {
  return estimate_t_cp(y, estimate_t_ifft(y, l), l);
}

}  // namespace ofdmsense::estimator
