#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "ofdmsense/dsp/resample.hpp"
#include "ofdmsense/estimator/estimator.hpp"
#include "ofdmsense/features/extract.hpp"
#include "ofdmsense/features/histogram.hpp"
#include "ofdmsense/features/sync.hpp"
#include "ofdmsense/wavegen/wifi.hpp"

namespace ofdmsense::features {

struct PipelineOptions {
  std::size_t caf_window = 8;   // l in the CAF product window
  std::size_t strip_samples = wavegen::kPreambleSamples;
  std::size_t ht_symbols = 40;
  std::size_t he_symbols = 10;
  std::size_t nr_windows = 14;
  double beta_fraction = 0.1;
  int s_p = kBinsP;
  int s_q = kBinsQ;
};

struct PipelineResult {
  estimator::ParamEstimate estimate;
  SyncInfo sync;
  FeatureSet features;
  std::optional<Histogram2D> hist_p;  // Wi-Fi only, FullTwoPi
  std::optional<Histogram2D> hist_q;  // ModQuarterPi
  std::map<std::string, double> timings_ms;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(PipelineResult& r) : r_(r), t0_(std::chrono::steady_clock::now()) {}
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    r_.timings_ms[stage] = std::chrono::duration<double, std::milli>(now - t0_).count();
    t0_ = now;
  }

 private:
  PipelineResult& r_;
  std::chrono::steady_clock::time_point t0_;
};

/// Runs `fn`, tagging any Error it throws with `stage`.
template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.stage().empty() ? e.with_stage(stage) : e;
  }
}

}  // namespace detail

inline IqBuffer strip_preamble(const IqBuffer& y, std::size_t n) {
  if (y.size() <= n) throw Error(ErrorCode::InsufficientSamples, "capture shorter than the stripped preamble");
  return y.drop_front(n);
}

/// Wi-Fi path on a stripped 20 MHz capture with known parameters.
inline void run_wifi(const IqBuffer& y, PipelineResult& r, const PipelineOptions& opt, detail::StageClock& clock) {
  const auto& est = r.estimate;
  const int n_fft = static_cast<int>(est.ell_star);
  const int n_cp = est.n_cp_at(kCaptureRateHz);
  const int n_null = est.family == Family::WiFiHT ? 8 : 32;
  const std::size_t n_symbols = est.family == Family::WiFiHT ? opt.ht_symbols : opt.he_symbols;

  r.sync.p = detail::staged("sync", [&] { return locate_cp_start(y, n_fft, n_cp); });
  clock.mark("sync");
  r.sync.cfo_hz = detail::staged("cfo", [&] { return estimate_cfo(y, r.sync.p, n_fft, n_cp, kCaptureRateHz / n_fft); });
  const IqBuffer yc = correct_cfo(y, r.sync.cfo_hz);
  clock.mark("cfo");
  r.features = detail::staged("extract", [&] { return extract_wifi_features(yc, n_fft, n_cp, r.sync, n_symbols, n_null); });
  clock.mark("extract");
  detail::staged("histogram", [&] {
    r.hist_p = build_histogram(r.features, opt.s_p, PhaseMode::FullTwoPi);
    r.hist_q = build_histogram(r.features, opt.s_q, PhaseMode::ModQuarterPi);
  });
  clock.mark("histogram");
}

/// 5G path: resample to 30.72 MHz, locate the long CP (normal CP) or the CP
/// grid (extended CP), correct CFO and extract from nr_windows symbols.
inline void run_5g(const IqBuffer& y, PipelineResult& r, const PipelineOptions& opt, detail::StageClock& clock) {
  const auto& est = r.estimate;
  const int mu = est.mu;
  const int n_fft = nr_n_fft(mu);
  const bool extended = est.nr_cp == NrCp::Extended;
  const int n_cp = extended ? nr_extended_cp() : nr_short_cp(mu);
  const double scs = 15e3 * (1 << mu);

  const IqBuffer y5 = detail::staged("resample", [&] { return dsp::resample(y, kNrRateHz); });
  clock.mark("resample");
  std::vector<SymbolTiming> sched = detail::staged("sync", [&] {
    if (extended) {
      r.sync.p = locate_cp_start(y5, n_fft, n_cp);
      return uniform_schedule(r.sync.p, n_fft, n_cp, y5.size());
    }
    const auto lc = find_long_cp(y5, mu);
    r.sync.index_long_cp = lc.index_long_cp;
    r.sync.p = lc.index_long_cp % (n_fft + n_cp);
    return nr_schedule(lc.index_long_cp, mu, y5.size());
  });
  clock.mark("sync");
  r.sync.cfo_hz = detail::staged("cfo", [&] { return estimate_cfo(y5.view(), sched, n_fft, n_cp, scs); });
  const IqBuffer yc = correct_cfo(y5, r.sync.cfo_hz);
  clock.mark("cfo");
  r.features = detail::staged("extract", [&] {
    if (sched.size() < opt.nr_windows)
      throw Error(ErrorCode::InsufficientSamples, "capture holds " + std::to_string(sched.size()) + " 5G symbols, need " +
                                                      std::to_string(opt.nr_windows));
    sched.resize(opt.nr_windows);
    return extract_features(yc, sched, n_fft, n_cp, {0, opt.beta_fraction, !extended});
  });
  clock.mark("extract");
  detail::staged("histogram", [&] { r.hist_q = build_histogram(r.features, opt.s_q, PhaseMode::ModQuarterPi); });
  clock.mark("histogram");
}

/// Full chain on a 20 MHz capture: strip, estimate, then the family path.
/// Fills `r` stage by stage, so a caller catching an Error keeps whatever
/// was decided before the failing stage.
inline void run_pipeline(const IqBuffer& capture, PipelineResult& r, const PipelineOptions& opt = {}) {
  detail::StageClock clock(r);
  const IqBuffer y = detail::staged("strip", [&] { return strip_preamble(capture, opt.strip_samples); });
  r.estimate = detail::staged("estimate", [&] { return estimator::estimate_params(y, opt.caf_window); });
  clock.mark("estimate");
  if (is_wifi(r.estimate.family))
    run_wifi(y, r, opt, clock);
  else
    run_5g(y, r, opt, clock);
}

inline PipelineResult run_pipeline(const IqBuffer& capture, const PipelineOptions& opt = {}) {
  PipelineResult r;
  run_pipeline(capture, r, opt);
  return r;
}

}  // namespace ofdmsense::features
