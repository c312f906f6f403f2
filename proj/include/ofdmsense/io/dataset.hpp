#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ofdmsense/features/pipeline.hpp"
#include "ofdmsense/io/config.hpp"
#include "ofdmsense/io/histogram_file.hpp"
#include "ofdmsense/io/manifest.hpp"

namespace ofdmsense::io {

/// A (family, T_IFFT, T_CP) combination and the modulations generated for it.
struct DatasetCase {
  Family family = Family::WiFiHT;
  double t_cp_us = 0.8;  // Wi-Fi
  int mu = 1;            // 5G
  NrCp nr_cp = NrCp::Normal;
  std::vector<Modulation> modulations;
};

struct DatasetSpec {
  std::uint64_t master_seed = 0;
  std::vector<double> snr_db;
  std::size_t train_per_case = 0;  // per (case, modulation, SNR)
  std::size_t test_per_case = 0;
  std::vector<DatasetCase> cases;
  unsigned workers = 1;
  double max_cfo_hz = 0.0;  // CFO drawn uniformly from [-max, max]
  double sdr_rate_hz = kCaptureRateHz;
  double pdsch_min_mhz = 15.0;
  double pdsch_max_mhz = 18.0;
  double wifi_duration_s = kWifiDefaultDurationS;
  double nr_duration_s = kNrDefaultDurationS;
  int s_p = features::kBinsP;
  int s_q = features::kBinsQ;
};

inline DatasetCase parse_dataset_case(const json& j, std::size_t i) {
  const std::string where = "cases[" + std::to_string(i) + "]";
  require_known_keys(j, {"family", "t_cp_us", "mu", "nr_cp", "modulations"}, where);
  DatasetCase c;
  c.family = parse_family_field(j, where);
  c.t_cp_us = field_or(j, "t_cp_us", c.t_cp_us, where);
  c.mu = field_or(j, "mu", c.mu, where);
  if (j.contains("nr_cp")) c.nr_cp = parse_nr_cp(field<std::string>(j, "nr_cp", where), where);
  if (j.contains("modulations")) {
    for (const auto& s : field<std::vector<std::string>>(j, "modulations", where))
      c.modulations.push_back(parse_modulation_value(s, "modulations", where));
  } else {
    c.modulations = legal_modulations(c.family);
  }
  if (c.modulations.empty()) throw config_error(where + ": field 'modulations' is empty");
  for (auto m : c.modulations) {
    SignalConfig probe;
    probe.family = c.family;
    probe.modulation = m;
    probe.t_cp_us = c.t_cp_us;
    probe.mu = c.mu;
    probe.nr_cp = c.nr_cp;
    try {
      validate(probe);
    } catch (const Error& e) {
      throw config_error(where + ": " + e.detail());
    }
  }
  return c;
}

inline DatasetSpec parse_dataset_spec(const json& j) {
  const std::string where = "dataset spec";
  require_known_keys(j,
                     {"schema_version", "master_seed", "snr_db", "train_per_case", "test_per_case", "cases", "workers",
                      "max_cfo_hz", "sdr_rate_hz", "pdsch_bandwidth_mhz", "wifi_duration_s", "nr_duration_s", "s_p",
                      "s_q"},
                     where);
  check_schema_version(j, where);
  DatasetSpec s;
  s.master_seed = field<std::uint64_t>(j, "master_seed", where);
  s.snr_db = field<std::vector<double>>(j, "snr_db", where);
  if (s.snr_db.empty()) throw config_error(where + ": field 'snr_db' is empty");
  s.train_per_case = field<std::size_t>(j, "train_per_case", where);
  s.test_per_case = field<std::size_t>(j, "test_per_case", where);
  const auto cases = field<json>(j, "cases", where);
  if (!cases.is_array() || cases.empty()) throw config_error(where + ": field 'cases' must be a non-empty array");
  for (std::size_t i = 0; i < cases.size(); ++i) s.cases.push_back(parse_dataset_case(cases[i], i));
  s.workers = field_or(j, "workers", s.workers, where);
  s.max_cfo_hz = field_or(j, "max_cfo_hz", s.max_cfo_hz, where);
  s.sdr_rate_hz = field_or(j, "sdr_rate_hz", s.sdr_rate_hz, where);
  if (j.contains("pdsch_bandwidth_mhz")) {
    const auto bw = field<std::vector<double>>(j, "pdsch_bandwidth_mhz", where);
    if (bw.size() != 2 || bw[0] > bw[1] || bw[0] <= 0.0)
      throw config_error(where + ": field 'pdsch_bandwidth_mhz' must be [min, max]");
    s.pdsch_min_mhz = bw[0];
    s.pdsch_max_mhz = bw[1];
  }
  s.wifi_duration_s = field_or(j, "wifi_duration_s", s.wifi_duration_s, where);
  s.nr_duration_s = field_or(j, "nr_duration_s", s.nr_duration_s, where);
  s.s_p = field_or(j, "s_p", s.s_p, where);
  s.s_q = field_or(j, "s_q", s.s_q, where);
  if (s.s_p <= 0 || s.s_q <= 0) throw config_error(where + ": histogram sizes must be positive");
  if (s.sdr_rate_hz < kCaptureRateHz) throw config_error(where + ": field 'sdr_rate_hz' must be at least 20 MHz");
  if (s.max_cfo_hz < 0.0) throw config_error(where + ": field 'max_cfo_hz' must be non-negative");
  return s;
}

/// One dataset item before generation.
struct ItemPlan {
  std::size_t index = 0;
  std::size_t case_index = 0;
  Modulation modulation = Modulation::QPSK;
  double snr_db = 0.0;
  std::string split;
};

/// Items in manifest order: case, modulation, SNR, then train before test.
inline std::vector<ItemPlan> plan_items(const DatasetSpec& s) {
  std::vector<ItemPlan> items;
  for (std::size_t c = 0; c < s.cases.size(); ++c)
    for (auto m : s.cases[c].modulations)
      for (double snr : s.snr_db) {
        for (std::size_t k = 0; k < s.train_per_case; ++k) items.push_back({items.size(), c, m, snr, "train"});
        for (std::size_t k = 0; k < s.test_per_case; ++k) items.push_back({items.size(), c, m, snr, "test"});
      }
  return items;
}

inline std::size_t rows_per_item(Family f) { return is_wifi(f) ? 2 : 1; }

inline std::size_t expected_rows(const DatasetSpec& s) {
  std::size_t n = 0;
  for (const auto& c : s.cases)
    n += rows_per_item(c.family) * c.modulations.size() * s.snr_db.size() * (s.train_per_case + s.test_per_case);
  return n;
}

/// Signal config of an item. Every random draw comes from the item's own
/// stream, so the result does not depend on which worker builds it.
inline SignalConfig item_signal_config(const DatasetSpec& s, const ItemPlan& it) {
  const auto& c = s.cases[it.case_index];
  CounterRng rng = item_rng(s.master_seed, it.index);
  SignalConfig cfg;
  cfg.family = c.family;
  cfg.modulation = it.modulation;
  cfg.t_cp_us = c.t_cp_us;
  cfg.mu = c.mu;
  cfg.nr_cp = c.nr_cp;
  cfg.snr_db = it.snr_db;
  cfg.sdr_rate_hz = s.sdr_rate_hz;
  cfg.seed = rng();
  cfg.cfo_hz = s.max_cfo_hz * (2.0 * rng.uniform() - 1.0);
  if (is_wifi(c.family)) {
    cfg.duration_s = s.wifi_duration_s;
    cfg.timing_offset_samples = static_cast<std::size_t>(rng.uniform_int(0, ofdm_config(cfg).symbol_length() - 1));
  } else {
    cfg.duration_s = s.nr_duration_s;
    cfg.start_offset_samples = static_cast<std::size_t>(rng.uniform_int(0, kNrHalfSubframeSamples - 1));
    cfg.pdsch_bandwidth_mhz = s.pdsch_min_mhz + (s.pdsch_max_mhz - s.pdsch_min_mhz) * rng.uniform();
  }
  return cfg;
}

inline std::string item_file_name(std::size_t index, features::PhaseMode mode) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "hist/%06zu_%s.f32", index, mode == features::PhaseMode::FullTwoPi ? "P" : "Q");
  return buf;
}

/// Generates one item, writing its histogram files under `out_dir`.
inline std::vector<ManifestRow> make_item(const DatasetSpec& s, const ItemPlan& it, const std::filesystem::path& out_dir) {
  const auto sig = item_signal_config(s, it);
  const auto cfg = ofdm_config(sig);
  std::vector<features::PhaseMode> modes;
  if (is_wifi(sig.family)) modes.push_back(features::PhaseMode::FullTwoPi);
  modes.push_back(features::PhaseMode::ModQuarterPi);

  ManifestRow base;
  base.item = it.index;
  base.split = it.split;
  base.label = it.modulation;
  base.family = sig.family;
  base.scs_hz = cfg.scs_hz;
  base.t_cp_s = cfg.t_cp_s();
  base.snr_db = it.snr_db;
  base.seed = sig.seed;

  std::vector<ManifestRow> rows;
  try {
    features::PipelineOptions opt;
    opt.s_p = s.s_p;
    opt.s_q = s.s_q;
    const auto result = features::run_pipeline(generate_capture(sig), opt);
    for (auto mode : modes) {
      const auto& h = mode == features::PhaseMode::FullTwoPi ? *result.hist_p : *result.hist_q;
      ManifestRow r = base;
      r.path = item_file_name(it.index, mode);
      r.phase_mode = mode;
      r.s_bins = h.s;
      r.z_total = h.z_total;
      write_histogram_file(out_dir / *r.path, h, std::string(to_string(it.modulation)));
      rows.push_back(r);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    rows.clear();
    for (auto mode : modes) {
      ManifestRow r = base;
      r.status = "failed";
      r.path.reset();
      r.phase_mode = mode;
      r.s_bins = mode == features::PhaseMode::FullTwoPi ? s.s_p : s.s_q;
      r.error = e.what();
      rows.push_back(r);
    }
  }
  return rows;
}

struct DatasetSummary {
  std::size_t items = 0;
  std::size_t failed_items = 0;
  std::size_t rows = 0;
};

/// Builds the dataset in `out_dir` (hist/ plus manifest.jsonl) with a pool of
/// `workers` threads (0 keeps spec.workers). Output is independent of the
/// worker count.
inline DatasetSummary make_dataset(const DatasetSpec& s, const std::filesystem::path& out_dir, unsigned workers = 0,
                                   const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "hist", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + (out_dir / "hist").string() + ": " + ec.message());

  const auto items = plan_items(s);
  std::vector<std::vector<ManifestRow>> rows(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  std::exception_ptr io_failure;
  std::mutex failure_mu;

  auto work = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        rows[i] = make_item(s, items[i], out_dir);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!io_failure) io_failure = std::current_exception();
        next = items.size();
        return;
      }
      const auto d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(d, items.size());
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(workers ? workers : s.workers,
                                                             static_cast<unsigned>(std::max<std::size_t>(items.size(), 1))));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (io_failure) std::rethrow_exception(io_failure);

  DatasetSummary summary;
  summary.items = items.size();
  std::vector<ManifestRow> flat;
  for (auto& r : rows) {
    if (!r.empty() && !r.front().ok()) ++summary.failed_items;
    flat.insert(flat.end(), r.begin(), r.end());
  }
  summary.rows = flat.size();
  write_manifest(out_dir / "manifest.jsonl", flat);
  return summary;
}

}  // namespace ofdmsense::io
