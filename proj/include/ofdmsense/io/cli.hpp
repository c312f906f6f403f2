#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofdmsense/features/pipeline.hpp"
#include "ofdmsense/io/config.hpp"
#include "ofdmsense/io/dataset.hpp"
#include "ofdmsense/io/histogram_file.hpp"
#include "ofdmsense/io/iq_file.hpp"
#include "ofdmsense/io/pgm.hpp"

namespace ofdmsense::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitConfig = 2;

inline json to_json(const estimator::ParamEstimate& e) {
  json caf = json::object();
  for (const auto& [lag, v] : e.caf_scores) caf[std::to_string(lag)] = v;
  json cp = json::array();
  for (const auto& [t, v] : e.cp_scores) cp.push_back({{"t_cp_s", t}, {"score", v}});
  json j = {{"family", std::string(to_string(e.family))},
            {"ell_star", e.ell_star},
            {"t_ifft_s", e.t_ifft_s},
            {"scs_hz", e.t_ifft_s > 0 ? 1.0 / e.t_ifft_s : 0.0},
            {"t_cp_s", e.t_cp_s ? json(*e.t_cp_s) : json(nullptr)},
            {"margin_db", e.margin_db},
            {"caf_scores", caf},
            {"cp_scores", cp}};
  if (e.family == Family::NR5G) {
    j["mu"] = e.mu;
    j["nr_cp"] = e.nr_cp ? json(to_string(*e.nr_cp)) : json(nullptr);
  }
  return j;
}

inline json to_json(const features::SyncInfo& s) {
  return {{"p", s.p},
          {"index_long_cp", s.index_long_cp ? json(*s.index_long_cp) : json(nullptr)},
          {"cfo_hz", s.cfo_hz}};
}

inline json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"stage", e.stage()}, {"detail", e.detail()}};
}

/// Report of a pipeline run; stages that did not complete are left out.
inline json pipeline_report(const features::PipelineResult& r, const Error* failure) {
  json j = {{"status", failure ? "failed" : "ok"}, {"timings_ms", r.timings_ms}};
  if (r.timings_ms.count("estimate")) j["estimate"] = to_json(r.estimate);
  if (r.timings_ms.count("cfo")) {
    j["sync"] = to_json(r.sync);
  } else if (r.timings_ms.count("sync")) {
    j["sync"] = to_json(r.sync);
    j["sync"]["cfo_hz"] = nullptr;
  }
  if (r.timings_ms.count("extract"))
    j["features"] = {{"entries", r.features.entries.size()}, {"symbols", r.features.n_symbols}};
  if (failure) j["error"] = error_json(*failure);
  return j;
}

namespace detail {

inline int exit_code_for(const Error& e) { return e.stage() == "config" ? kExitConfig : kExitPipeline; }

inline void emit(const json& j, const std::string& out_path, std::ostream& out) {
  if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
  out << j.dump(2) << "\n";
}

/// Runs the pipeline on an IQ file, printing the report; returns the exit code.
inline int run_on_file(const std::string& path, const features::PipelineOptions& opt, const std::string& report_path,
                       std::ostream& out, features::PipelineResult& r) {
  const auto f = read_iq_file(path);
  if (std::abs(f.iq.sample_rate_hz - kCaptureRateHz) > 1.0)
    throw Error(ErrorCode::ConfigMismatch, path + " is not a 20 MHz capture").with_stage("config");
  try {
    features::run_pipeline(f.iq, r, opt);
  } catch (const Error& e) {
    emit(pipeline_report(r, &e), report_path, out);
    return kExitPipeline;
  }
  emit(pipeline_report(r, nullptr), report_path, out);
  return kExitOk;
}

}  // namespace detail

/// Command-line entry point. Exit codes: 0 success, 1 pipeline failure,
/// 2 configuration error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"OFDM signal synthesis, blind parameter estimation and modulation feature extraction"};
  app.require_subcommand(1);

  std::string config_path, out_path, input;
  std::optional<std::uint64_t> seed;
  std::size_t caf_window = 8;
  unsigned workers = 0;

  auto* gen = app.add_subcommand("gen-signal", "synthesize a 20 MHz capture from a signal config");
  gen->add_option("--config", config_path, "signal config (JSON)")->required();
  gen->add_option("--out", out_path, "output IQ file; a .json sidecar is written next to it")->required();
  gen->add_option("--seed", seed, "override the config seed");

  auto* est = app.add_subcommand("estimate", "estimate OFDM parameters and synchronization of an IQ file");
  est->add_option("input", input, "IQ file")->required();
  est->add_option("--out", out_path, "also write the JSON report here");
  est->add_option("--caf-window", caf_window, "CAF product window length")->check(CLI::PositiveNumber);

  auto* ext = app.add_subcommand("extract", "run the full pipeline and write the histogram files");
  ext->add_option("input", input, "IQ file")->required();
  ext->add_option("--out", out_path, "output prefix; writes <prefix>_Q.f32 and, for Wi-Fi, <prefix>_P.f32")->required();
  ext->add_option("--caf-window", caf_window, "CAF product window length")->check(CLI::PositiveNumber);

  auto* mk = app.add_subcommand("make-dataset", "generate a labelled histogram dataset");
  mk->add_option("--config", config_path, "dataset spec (JSON)")->required();
  mk->add_option("--out", out_path, "output directory")->required();
  mk->add_option("--seed", seed, "override the master seed");
  mk->add_option("--workers", workers, "worker threads (default: spec value)");

  auto* ren = app.add_subcommand("render", "render a histogram file as a greyscale PGM image");
  ren->add_option("input", input, "histogram file")->required();
  ren->add_option("--out", out_path, "output PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*gen) {
      auto cfg = parse_signal_config(read_config_file(config_path));
      if (seed) cfg.seed = *seed;
      const auto iq = generate_capture(cfg);
      write_iq_file(out_path, iq, cfg.seed, to_json(cfg));
      out << "wrote " << iq.size() << " samples to " << out_path << "\n";
      return kExitOk;
    }
    features::PipelineOptions opt;
    opt.caf_window = caf_window;
    if (*est) {
      features::PipelineResult r;
      return detail::run_on_file(input, opt, out_path, out, r);
    }
    if (*ext) {
      features::PipelineResult r;
      const int code = detail::run_on_file(input, opt, {}, out, r);
      if (code != kExitOk) return code;
      if (r.hist_p) write_histogram_file(out_path + "_P.f32", *r.hist_p);
      write_histogram_file(out_path + "_Q.f32", *r.hist_q);
      return kExitOk;
    }
    if (*mk) {
      auto spec = parse_dataset_spec(read_config_file(config_path));
      if (seed) spec.master_seed = *seed;
      const auto s = make_dataset(spec, out_path, workers);
      out << json{{"items", s.items}, {"failed_items", s.failed_items}, {"rows", s.rows},
                  {"manifest", (std::filesystem::path(out_path) / "manifest.jsonl").string()}}
                 .dump(2)
          << "\n";
      return kExitOk;
    }
    if (*ren) {
      write_pgm(out_path, read_histogram_file(input).hist);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitConfig;
}

}  // namespace ofdmsense::io
