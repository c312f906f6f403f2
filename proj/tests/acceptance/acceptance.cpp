// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.
// Exit status is non-zero if any gated criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../test_util.hpp"
#include "ofdmsense/features/pipeline.hpp"
#include "ofdmsense/io/config.hpp"

using namespace ofdmsense;
using namespace ofdmsense::features;
using io::SignalConfig;
using testutil::phase_gap;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kStrip = wavegen::kPreambleSamples;
constexpr long kStripAtNrRate = 3072;  // 2000 samples at 20 MHz

int g_failures = 0;

void verdict(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void info(const std::string& line) {
  std::printf("      %s\n", line.c_str());
  std::fflush(stdout);
}

std::string pct(std::size_t hit, std::size_t n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f%% (%zu/%zu)", 100.0 * static_cast<double>(hit) / static_cast<double>(n), hit, n);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// A (family, T_IFFT, T_CP) combination.
struct Combo {
  std::string name;
  Family family;
  double t_cp_us = 0.0;
  int mu = 0;
  NrCp nr_cp = NrCp::Normal;
};

std::vector<Combo> all_combos() {
  return {{"HT 0.4us", Family::WiFiHT, 0.4},         {"HT 0.8us", Family::WiFiHT, 0.8},
          {"HE 0.8us", Family::WiFiHE, 0.8},         {"HE 1.6us", Family::WiFiHE, 1.6},
          {"HE 3.2us", Family::WiFiHE, 3.2},         {"NR mu0", Family::NR5G, 0, 0},
          {"NR mu1", Family::NR5G, 0, 1},            {"NR mu2 normal", Family::NR5G, 0, 2},
          {"NR mu2 extended", Family::NR5G, 0, 2, NrCp::Extended}};
}

/// Random capture of a combo. AWGN is added at the transmitter's own rate;
/// 5G captures begin at a uniformly random point of the downlink.
SignalConfig random_signal(const Combo& c, double snr_db, CounterRng& rng, double nr_duration_s) {
  SignalConfig s;
  s.family = c.family;
  s.t_cp_us = c.t_cp_us;
  s.mu = c.mu;
  s.nr_cp = c.nr_cp;
  const auto legal = legal_modulations(c.family);
  s.modulation = legal[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(legal.size()) - 1))];
  s.snr_db = snr_db;
  s.seed = rng();
  if (is_wifi(c.family)) {
    s.timing_offset_samples = static_cast<std::size_t>(rng.uniform_int(0, io::ofdm_config(s).symbol_length() - 1));
  } else {
    s.sdr_rate_hz = kNrRateHz;
    s.duration_s = nr_duration_s;
    s.start_offset_samples = static_cast<std::size_t>(rng.uniform_int(0, kNrHalfSubframeSamples - 1));
    s.pdsch_bandwidth_mhz = 15.0 + 3.0 * rng.uniform();
  }
  return s;
}

bool estimate_correct(const estimator::ParamEstimate& e, const Combo& c) {
  if (e.family != c.family) return false;
  if (is_wifi(c.family)) return e.t_cp_s && std::abs(*e.t_cp_s - c.t_cp_us * 1e-6) < 1e-9;
  return e.mu == c.mu && e.nr_cp == c.nr_cp;
}

/// First long-CP sample of the resampled 5G capture.
long true_long_cp_index(const SignalConfig& s) {
  return dsp::wrap(-static_cast<long long>(s.start_offset_samples) - kStripAtNrRate, kNrHalfSubframeSamples);
}

// ---- parameter estimation ----------------------------------------------------

void parameter_estimation() {
  const auto combos = all_combos();
  const std::vector<std::size_t> windows = {1, 2, 4, 8};
  constexpr std::size_t kItems = 200;
  std::map<std::size_t, std::vector<std::size_t>> hits;
  for (auto l : windows) hits[l].assign(combos.size(), 0);
  double gated_seconds = 0.0;

  for (std::size_t ci = 0; ci < combos.size(); ++ci) {
    CounterRng rng = CounterRng(1001).split(ci);
    for (std::size_t i = 0; i < kItems; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto s = random_signal(combos[ci], 5.0, rng, 0.5e-3);
      const auto y = io::generate_capture(s).drop_front(kStrip);
      const double gen_s = seconds_since(t0);
      for (auto l : windows) {
        const auto t1 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
          ok = estimate_correct(estimator::estimate_params(y, l), combos[ci]);
        } catch (const Error&) {
        }
        hits[l][ci] += ok;
        if (l == 2 || l == 4) gated_seconds += seconds_since(t1);
      }
      gated_seconds += gen_s;
    }
  }

  bool pass = gated_seconds < 300.0;
  std::string worst;
  double worst_acc = 1.0;
  for (auto l : windows) {
    std::string line = "l=" + std::to_string(l) + ":";
    std::size_t total = 0;
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
      const double acc = static_cast<double>(hits[l][ci]) / kItems;
      total += hits[l][ci];
      char buf[64];
      std::snprintf(buf, sizeof buf, " %s %.1f%%", combos[ci].name.c_str(), 100.0 * acc);
      line += buf;
      if (l == 2 || l == 4) {
        if (acc < 0.97) pass = false;
        if (acc < worst_acc) {
          worst_acc = acc;
          worst = "l=" + std::to_string(l) + " " + combos[ci].name;
        }
      }
    }
    info(line + " | overall " + pct(total, kItems * combos.size()) + (l == 2 || l == 4 ? "" : " (reported)"));
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "joint T_IFFT/T_CP at 5 dB, 200 items x 9 combos; worst %.1f%% (%s), need >= 97%% per combo; %.1f s, need < 300 s",
                100.0 * worst_acc, worst.c_str(), gated_seconds);
  verdict(pass, "parameter estimation", buf);
}

// ---- CP start ------------------------------------------------------------------

/// Distance from the first scheduled symbol to the nearest true CP start.
long nearest_start_error(long est, const std::vector<SymbolTiming>& truth) {
  long best = std::numeric_limits<long>::max();
  for (const auto& t : truth) best = std::min(best, std::abs(t.cp_start - est));
  return best;
}

void cp_start_localization() {
  constexpr std::size_t kTrials = 200;
  struct Tally {
    std::size_t quarter = 0, exact = 0;
  };
  std::map<std::string, Tally> tally;
  const std::vector<std::string> families = {"WiFiHT", "WiFiHE", "NR5G"};
  const auto combos = all_combos();

  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    CounterRng rng = CounterRng(2002).split(fi);
    std::vector<Combo> pool;
    for (const auto& c : combos)
      if (to_string(c.family) == families[fi]) pool.push_back(c);
    for (std::size_t t = 0; t < kTrials; ++t) {
      const auto& c = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
      const auto s = random_signal(c, 5.0, rng, 4e-3);
      PipelineResult r;
      try {
        run_pipeline(io::generate_capture(s), r);
      } catch (const Error&) {
        if (!r.timings_ms.count("sync")) continue;
      }
      long err = 0, eps = 0;
      if (is_wifi(c.family)) {
        const auto cfg = io::ofdm_config(s);
        err = static_cast<long>(testutil::circular_distance(r.sync.p, static_cast<long long>(s.timing_offset_samples),
                                                            cfg.symbol_length()));
        eps = cfg.n_cp() / 4;
      } else {
        const int n_fft = nr_n_fft(c.mu);
        const long len = 200000;
        std::vector<SymbolTiming> truth, est;
        if (c.nr_cp == NrCp::Normal) {
          truth = nr_schedule(true_long_cp_index(s), c.mu, len);
          est = nr_schedule(r.sync.index_long_cp.value_or(r.sync.p), c.mu, len);
        } else {
          const int sym = n_fft + nr_extended_cp();
          truth = uniform_schedule(dsp::wrap(true_long_cp_index(s), static_cast<long long>(sym)), n_fft, nr_extended_cp(), len);
          est = uniform_schedule(r.sync.p, n_fft, nr_extended_cp(), len);
        }
        err = nearest_start_error(est.front().cp_start, truth);
        eps = (c.nr_cp == NrCp::Normal ? nr_short_cp(c.mu) : nr_extended_cp()) / 4;
      }
      tally[families[fi]].quarter += err <= eps;
      tally[families[fi]].exact += err == 0;
    }
  }
  bool pass = true;
  std::string detail = "within N_CP/4 at 5 dB, 200 trials per family:";
  for (const auto& f : families) {
    pass = pass && tally[f].quarter >= kTrials * 95 / 100;
    detail += " " + f + " " + pct(tally[f].quarter, kTrials);
    info(f + " exact start (reported): " + pct(tally[f].exact, kTrials));
  }
  verdict(pass, "CP start localization", detail + "; need >= 95% each");
}

// ---- long CP -------------------------------------------------------------------

void long_cp_localization() {
  constexpr std::size_t kTrials = 100;
  std::map<int, std::size_t> hits;
  for (int mu = 0; mu <= 2; ++mu) {
    CounterRng rng = CounterRng(3003).split(static_cast<std::uint64_t>(mu));
    const Combo c{"", Family::NR5G, 0, mu};
    const long sym = nr_n_fft(mu) + nr_short_cp(mu);
    for (std::size_t t = 0; t < kTrials; ++t) {
      const auto s = random_signal(c, 5.0, rng, 4e-3);
      try {
        const auto y5 = dsp::resample(io::generate_capture(s).drop_front(kStrip), kNrRateHz);
        const auto lc = find_long_cp(y5, mu);
        hits[mu] += testutil::circular_distance(lc.index_long_cp, true_long_cp_index(s), kNrHalfSubframeSamples) < sym / 2.0;
      } catch (const Error&) {
      }
    }
  }
  info("mu=2 (reported): " + pct(hits[2], kTrials));
  verdict(hits[0] >= 85 && hits[1] >= 85, "long-CP localization",
          "correct long-CP symbol at 5 dB, 100 trials: mu=0 " + pct(hits[0], kTrials) + ", mu=1 " + pct(hits[1], kTrials) +
              "; need >= 85% each");
}

// ---- synchronization invariance -------------------------------------------------

/// Noise-free uniform-CP or normal-CP transmission starting at sample 0.
struct CleanSignal {
  IqBuffer y;
  int n_fft = 0;
  int n_cp = 0;
  int n_null = 0;
  double scs = 0.0;
  bool nr = false;
  int mu = 0;
  bool long_cp = false;
};

CleanSignal clean_signal(int kind, CounterRng& rng) {
  CleanSignal c;
  const auto mods = [&](Family f) {
    const auto legal = legal_modulations(f);
    return legal[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(legal.size()) - 1))];
  };
  const std::uint64_t seed = rng();
  if (kind <= 1) {
    const Family f = kind == 0 ? Family::WiFiHT : Family::WiFiHE;
    const auto opts = wifi_cp_options(f);
    const double t_cp = opts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(opts.size()) - 1))];
    const auto cfg = f == Family::WiFiHT ? wifi_ht_config(t_cp, mods(f)) : wifi_he_config(t_cp, mods(f));
    c.y = wavegen::build_wifi_frame(cfg, 12, seed).drop_front(kStrip);
    c.n_fft = cfg.n_fft;
    c.n_cp = cfg.n_cp();
    c.n_null = cfg.n_null;
    c.scs = cfg.scs_hz;
  } else {
    c.nr = true;
    c.mu = kind == 2 ? 2 : static_cast<int>(rng.uniform_int(0, 2));
    c.long_cp = kind == 3;
    const auto cfg = nr_config(c.mu, c.long_cp ? NrCp::Normal : NrCp::Extended, mods(Family::NR5G));
    c.y = wavegen::build_5g_frame(cfg, wavegen::random_channel_plan(cfg, 1e-3, seed), 1e-3, seed);
    c.n_fft = cfg.n_fft;
    c.n_cp = cfg.n_cp();
    c.scs = cfg.scs_hz;
  }
  return c;
}

std::vector<SymbolTiming> clean_schedule(const CleanSignal& c, long shift, std::size_t count) {
  auto s = c.long_cp ? nr_schedule(0, c.mu, c.y.size()) : uniform_schedule(0, c.n_fft, c.n_cp, c.y.size());
  s.erase(s.begin());  // keep every window clear of the buffer start
  s.resize(std::min(count, s.size()));
  for (auto& t : s) t.cp_start += shift;
  return s;
}

FeatureSet clean_features(const CleanSignal& c, const IqBuffer& y, const std::vector<SymbolTiming>& sched) {
  const ExtractOptions opt{c.nr ? 0 : c.n_null, c.nr ? std::optional<double>(0.1) : std::nullopt, c.long_cp};
  return extract_features(y, sched, c.n_fft, c.n_cp, opt);
}

void sync_invariance() {
  CounterRng rng(4004);
  std::size_t timing_checks = 0, timing_ok = 0, amp_checks = 0, amp_ok = 0, cfo_checks = 0, cfo_ok = 0;

  // Timing errors inside the CP: feature multisets agree entry for entry.
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = clean_signal(trial % 4, rng);
    const long half = c.n_cp / 2 - 1;
    const long e1 = rng.uniform_int(-half, half), e2 = rng.uniform_int(-half, half);
    const auto fa = clean_features(c, c.y, clean_schedule(c, e1, 8));
    const auto fb = clean_features(c, c.y, clean_schedule(c, e2, 8));
    ++timing_checks;
    bool ok = fa.entries.size() == fb.entries.size() && !fa.entries.empty();
    for (std::size_t i = 0; ok && i < fa.entries.size(); ++i) {
      const auto &a = fa.entries[i], &b = fb.entries[i];
      ok = a.symbol == b.symbol && a.subcarrier == b.subcarrier &&
           std::abs(a.amplitude - b.amplitude) <= 1e-6 * std::max(1.0, a.amplitude) && phase_gap(a.phase_diff, b.phase_diff) <= 1e-6;
    }
    timing_ok += ok;
  }

  // Amplitudes survive a common phase rotation and a timing error.
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = clean_signal(trial % 4, rng);
    IqBuffer rotated = c.y;
    const cplx w = std::polar(1.0, 2.0 * kPi * rng.uniform());
    for (auto& v : rotated.samples) v *= w;
    const long e = rng.uniform_int(-(c.n_cp / 2 - 1), c.n_cp / 2 - 1);
    const auto fa = clean_features(c, c.y, clean_schedule(c, 0, 8));
    const auto fb = clean_features(c, rotated, clean_schedule(c, e, 8));
    ++amp_checks;
    bool ok = fa.entries.size() == fb.entries.size() && !fa.entries.empty();
    for (std::size_t i = 0; ok && i < fa.entries.size(); ++i)
      ok = std::abs(fa.entries[i].amplitude - fb.entries[i].amplitude) <= 1e-6 * std::max(1.0, fa.entries[i].amplitude) &&
           phase_gap(fa.entries[i].phase_diff, fb.entries[i].phase_diff) <= 1e-6;
    amp_ok += ok;
  }

  // Integer-spacing CFO on uniform-CP signals: spectrum moves z bins, phase
  // axis rotates by 2*pi*z*N_CP/N_FFT.
  for (int trial = 0; trial < 60; ++trial) {
    const auto c = clean_signal(trial % 3, rng);
    const int z = static_cast<int>(rng.uniform_int(1, 3)) * (rng.uniform() < 0.5 ? -1 : 1);
    const auto sched = clean_schedule(c, 0, 8);
    const auto f0 = clean_features(c, c.y, sched);
    const auto fz = clean_features(c, dsp::apply_cfo(c.y, z * c.scs), sched);
    const double shift = 2.0 * kPi * z * c.n_cp / c.n_fft;
    std::map<std::pair<std::size_t, long long>, const FeatureEntry*> by_key;
    for (const auto& e : fz.entries) by_key[{e.symbol, dsp::wrap(static_cast<long long>(e.subcarrier), c.n_fft)}] = &e;
    ++cfo_checks;
    bool ok = f0.entries.size() == fz.entries.size() && !f0.entries.empty();
    for (std::size_t i = 0; ok && i < f0.entries.size(); ++i) {
      const auto& a = f0.entries[i];
      const auto it = by_key.find({a.symbol, dsp::wrap(static_cast<long long>(a.subcarrier + z), c.n_fft)});
      ok = it != by_key.end() && std::abs(it->second->amplitude - a.amplitude) <= 1e-6 * std::max(1.0, a.amplitude) &&
           phase_gap(it->second->phase_diff, a.phase_diff + shift) <= 1e-6;
    }
    cfo_ok += ok;
  }

  info("timing error inside CP, entries equal within 1e-6: " + pct(timing_ok, timing_checks));
  info("amplitude preservation under rotation and timing error: " + pct(amp_ok, amp_checks));
  info("integer-spacing CFO shifts phase axis by 2*pi*z*N_CP/N_FFT: " + pct(cfo_ok, cfo_checks));
  verdict(timing_ok == timing_checks && amp_ok == amp_checks && cfo_ok == cfo_checks, "synchronization invariance",
          std::to_string(timing_checks + amp_checks + cfo_checks) + " noise-free property trials over HT, HE and 5G, " +
              pct(timing_ok + amp_ok + cfo_ok, timing_checks + amp_checks + cfo_checks) + " passed; need 100%");
}

// ---- constellation-difference oracle ---------------------------------------------

void constellation_oracle() {
  CounterRng rng(5005);
  bool pass = true;
  std::string detail;
  for (auto m : kAllModulations) {
    const auto oracle = testutil::phase_difference_oracle(m, kPi / 2);
    std::size_t checked = 0, on_lattice = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
      SignalConfig s;
      const bool ht = trial % 2 == 1 && m != Modulation::QAM256 && m != Modulation::QAM1024;
      s.family = ht ? Family::WiFiHT : Family::WiFiHE;
      const auto opts = wifi_cp_options(s.family);
      s.t_cp_us = 1e6 * opts[static_cast<std::size_t>(trial) % opts.size()];
      s.modulation = m;
      s.seed = rng();
      const auto cfg = io::ofdm_config(s);
      s.timing_offset_samples = static_cast<std::size_t>(rng.uniform_int(0, cfg.symbol_length() - 1));
      s.cfo_hz = cfg.scs_hz * (rng.uniform() - 0.5) * 0.5;
      try {
        const auto r = run_pipeline(io::generate_capture(s));
        std::vector<double> amps;
        for (const auto& e : r.features.entries) amps.push_back(e.amplitude);
        const double p99 = dsp::percentile(amps, 99.0);
        for (const auto& e : r.features.entries) {
          if (e.amplitude > p99 * (1.0 + kEdgeSlack)) continue;
          const double d = testutil::distance_to_oracle(oracle, e.phase_diff, kPi / 2);
          worst = std::max(worst, d);
          ++checked;
          on_lattice += d <= 1e-6;
        }
      } catch (const Error& e) {
        info(std::string(to_string(m)) + ": pipeline failed: " + e.what());
        pass = false;
      }
    }
    pass = pass && checked > 0 && on_lattice == checked;
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s %zu/%zu (max %.1e)", std::string(to_string(m)).c_str(), on_lattice, checked, worst);
    detail += buf;
  }
  verdict(pass, "constellation-difference oracle", "retained noise-free phase differences within 1e-6 of the enumerated set (mod pi/2):" + detail);
}

// ---- CFO ---------------------------------------------------------------------------

void cfo_estimation() {
  CounterRng rng(6006);
  const std::vector<double> fractions = {0.05, 0.1, 0.2, 0.3, 0.4, 0.49};
  std::size_t n = 0, ok = 0, alias_n = 0, alias_ok = 0;
  double worst_rel = 0.0, worst_alias = 0.0;
  for (const auto& c : all_combos()) {
    for (double f : fractions)
      for (int sign : {-1, 1}) {
        auto s = random_signal(c, 30.0, rng, 4e-3);
        const double scs = io::ofdm_config(s).scs_hz;
        s.cfo_hz = sign * f * scs;
        double est = NAN;
        try {
          est = run_pipeline(io::generate_capture(s)).sync.cfo_hz;
        } catch (const Error&) {
        }
        const double rel = std::abs(est - s.cfo_hz) / std::abs(s.cfo_hz);
        worst_rel = std::max(worst_rel, std::isnan(rel) ? INFINITY : rel);
        ++n;
        ok += rel <= 0.01;
      }
    for (int sign : {-1, 1}) {
      auto s = random_signal(c, 30.0, rng, 4e-3);
      const double scs = io::ofdm_config(s).scs_hz;
      s.cfo_hz = sign * scs;
      double est = NAN;
      try {
        est = run_pipeline(io::generate_capture(s)).sync.cfo_hz;
      } catch (const Error&) {
      }
      const double a = std::abs(est) / scs;
      worst_alias = std::max(worst_alias, std::isnan(a) ? INFINITY : a);
      ++alias_n;
      alias_ok += a <= 0.01;
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "30 dB, |cfo| in {0.05..0.49} scs over 9 combos: %s within 1%% (worst %.3f%%); cfo = +-scs estimates %s below 1%% of scs (worst %.2e scs)",
                pct(ok, n).c_str(), 100.0 * worst_rel, pct(alias_ok, alias_n).c_str(), worst_alias);
  verdict(ok == n && alias_ok == alias_n, "CFO estimation", buf);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"parameter estimation", parameter_estimation},   {"CP start localization", cp_start_localization},
      {"long-CP localization", long_cp_localization},   {"synchronization invariance", sync_invariance},
      {"constellation-difference oracle", constellation_oracle}, {"CFO estimation", cfo_estimation},
  };
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run();
    } catch (const std::exception& e) {
      verdict(false, name, std::string("aborted: ") + e.what());
    }
    info(std::string(name) + " took " + std::to_string(static_cast<int>(seconds_since(t0))) + " s");
  }
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
