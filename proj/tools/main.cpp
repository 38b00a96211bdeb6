#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "camdepth/cloud.hpp"
#include "camdepth/config.hpp"
#include "camdepth/manifest.hpp"
#include "camdepth/metrics.hpp"
#include "camdepth/noise.hpp"
#include "camdepth/normalize.hpp"
#include "camdepth/png_io.hpp"
#include "camdepth/traj.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_workers() {
  if (const char* env = std::getenv("CAMDEPTH_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Work-stealing loop over [0, n); fn must not throw.
void run_parallel(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

json metric_report_json(const camdepth::MetricReport& r) {
  return json{{"l1", r.l1},
              {"rmse", r.rmse},
              {"abs_rel", r.abs_rel},
              {"delta_half", r.delta_half},
              {"delta_one", r.delta_one},
              {"coverage", r.coverage},
              {"n_pixels", r.n_pixels}};
}

std::string metric_csv_row(const std::string& id, const camdepth::MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%zu", id.c_str(), r.l1, r.rmse,
                r.abs_rel, r.delta_half, r.delta_one, r.coverage, r.n_pixels);
  return buf;
}

int cmd_synth(const camdepth::RunConfig& run, const std::string& log_flag) {
  using namespace camdepth;
  run.check();
  const NoisePipelineConfig& cfg = run.pipeline;

  const DatasetManifest manifest = load_manifest(run.manifest_path);
  fs::create_directories(run.output_dir);
  const std::string log_path =
      log_flag.empty() ? (fs::path(run.output_dir) / "run_log.jsonl").string() : log_flag;

  struct SampleOutcome {
    bool ok = false;
    std::string error;
    int radius = 0;
    double ms = 0.0;
  };
  std::vector<SampleOutcome> outcomes(manifest.samples.size());

  run_parallel(manifest.samples.size(), run.workers, [&](std::size_t i) {
    const SampleRecord& rec = manifest.samples[i];
    SampleOutcome& out = outcomes[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Intrinsics& k = manifest.intrinsics_for(rec);
      const ImageRGB rgb = load_rgb(manifest.resolve(rec.rgb_path));
      const DepthMap gt = load_depth(manifest.resolve(rec.gt_depth_path), k.depth_scale);
      const SynthesisResult res = synthesize(rgb, gt, cfg, i);
      save_depth(res.depth, (fs::path(run.output_dir) / (rec.id + ".png")).string(), k.depth_scale);
      out.radius = res.rescale_radius;
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });

  std::ofstream log(log_path);
  log << json{{"event", "run_start"},
              {"command", "synth"},
              {"seed", run.seed},
              {"workers", run.workers},
              {"n_samples", manifest.samples.size()}}
             .dump()
      << "\n";
  std::size_t failures = 0;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& rec = manifest.samples[i];
    const auto& out = outcomes[i];
    json line{{"event", "sample"}, {"id", rec.id}, {"ok", out.ok}, {"ms", out.ms}};
    if (out.ok) {
      line["radius"] = out.radius;
    } else {
      line["error"] = out.error;
      ++failures;
      std::cerr << "synth: sample '" << rec.id << "' failed: " << out.error << "\n";
    }
    log << line.dump() << "\n";
  }
  log << json{{"event", "run_end"}, {"failures", failures}}.dump() << "\n";
  return failures == 0 ? 0 : 1;
}

struct EvalOptions {
  std::string pred_dir;  // empty: use manifest pred paths
  std::string policy = "intersection";
  std::string formats = "json,csv";
  bool fill = false;
  double bins = 0.0;        // 0: no binned report
  double max_range = 10.0;  // meters
};

int cmd_eval(camdepth::RunConfig run, const EvalOptions& opt) {
  using namespace camdepth;
  run.json_reports = opt.formats.find("json") != std::string::npos;
  run.csv_reports = opt.formats.find("csv") != std::string::npos;
  run.check();
  const DatasetManifest manifest = load_manifest(run.manifest_path);
  const ValidPolicy policy = valid_policy_from_string(opt.policy);
  fs::create_directories(run.output_dir);

  struct SampleEval {
    bool ok = false;
    std::string error;
    double ms = 0.0;
    MetricReport report;
    std::vector<double> bin_abs, bin_rel;  // per-bin error sums for pooling
    std::vector<std::size_t> bin_n;
  };
  std::vector<SampleEval> evals(manifest.samples.size());
  const std::size_t n_bins =
      opt.bins > 0.0 ? static_cast<std::size_t>(std::ceil(opt.max_range / opt.bins)) : 0;

  run_parallel(manifest.samples.size(), run.workers, [&](std::size_t i) {
    const SampleRecord& rec = manifest.samples[i];
    SampleEval& ev = evals[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Intrinsics& k = manifest.intrinsics_for(rec);
      const DepthMap gt = load_depth(manifest.resolve(rec.gt_depth_path), k.depth_scale);
      std::string pred_path;
      if (!opt.pred_dir.empty()) {
        pred_path = (fs::path(opt.pred_dir) / (rec.id + ".png")).string();
      } else if (rec.pred_depth_path) {
        pred_path = manifest.resolve(*rec.pred_depth_path);
      } else {
        throw std::runtime_error("no prediction source (no --pred-dir and no pred path)");
      }
      if (!fs::exists(pred_path)) throw std::runtime_error("prediction missing: " + pred_path);
      DepthMap pred = load_depth(pred_path, k.depth_scale);
      if (opt.fill) pred = fill_holes_nearest(pred);
      ev.report = depth_metrics(pred, gt, policy);
      if (n_bins > 0) {
        const BinnedReport br = binned_accuracy(pred, gt, opt.bins, opt.max_range);
        ev.bin_abs.assign(n_bins, 0.0);
        ev.bin_rel.assign(n_bins, 0.0);
        ev.bin_n.assign(n_bins, 0);
        for (std::size_t b = 0; b < br.bins.size() && b < n_bins; ++b) {
          ev.bin_n[b] = br.bins[b].n;
          if (br.bins[b].n > 0) {
            ev.bin_abs[b] = *br.bins[b].l1 * br.bins[b].n;
            ev.bin_rel[b] = *br.bins[b].abs_rel * br.bins[b].n;
          }
        }
      }
      ev.ok = true;
    } catch (const std::exception& e) {
      ev.error = e.what();
    }
    ev.ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });

  std::ofstream log(fs::path(run.output_dir) / "run_log.jsonl");
  log << json{{"event", "run_start"},
              {"command", "eval"},
              {"policy", to_string(policy)},
              {"fill", opt.fill},
              {"workers", run.workers},
              {"n_samples", manifest.samples.size()}}
             .dump()
      << "\n";
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    json line{{"event", "sample"},
              {"id", manifest.samples[i].id},
              {"ok", evals[i].ok},
              {"ms", evals[i].ms}};
    if (!evals[i].ok) line["error"] = evals[i].error;
    log << line.dump() << "\n";
  }

  json out_json;
  out_json["policy"] = to_string(policy);
  out_json["fill"] = opt.fill;
  out_json["samples"] = json::array();

  std::ofstream csv;
  if (run.csv_reports) {
    csv.open(fs::path(run.output_dir) / "report.csv");
    csv << "id,l1,rmse,abs_rel,delta_half,delta_one,coverage,n_pixels\n";
  }

  MetricReport agg;
  agg.policy = policy;
  std::size_t n_ok = 0, failures = 0;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& rec = manifest.samples[i];
    const auto& ev = evals[i];
    if (!ev.ok) {
      ++failures;
      std::cerr << "eval: sample '" << rec.id << "' failed: " << ev.error << "\n";
      out_json["samples"].push_back(json{{"id", rec.id}, {"error", ev.error}});
      continue;
    }
    ++n_ok;
    json j = metric_report_json(ev.report);
    j["id"] = rec.id;
    out_json["samples"].push_back(j);
    if (run.csv_reports) csv << metric_csv_row(rec.id, ev.report) << "\n";
    agg.l1 += ev.report.l1;
    agg.rmse += ev.report.rmse;
    agg.abs_rel += ev.report.abs_rel;
    agg.delta_half += ev.report.delta_half;
    agg.delta_one += ev.report.delta_one;
    agg.coverage += ev.report.coverage;
    agg.n_pixels += ev.report.n_pixels;
  }

  // Aggregate is the unweighted mean over successfully scored samples.
  if (n_ok > 0) {
    agg.l1 /= n_ok;
    agg.rmse /= n_ok;
    agg.abs_rel /= n_ok;
    agg.delta_half /= n_ok;
    agg.delta_one /= n_ok;
    agg.coverage /= n_ok;
    out_json["aggregate"] = metric_report_json(agg);
    out_json["aggregate"]["n_samples"] = n_ok;
    if (run.csv_reports) csv << metric_csv_row("aggregate", agg) << "\n";
  }

  if (n_bins > 0) {
    std::ofstream bins_csv;
    if (run.csv_reports) {
      bins_csv.open(fs::path(run.output_dir) / "bins.csv");
      bins_csv << "bin_lo,bin_hi,n,l1,abs_rel\n";
    }
    json bins_json = json::array();
    for (std::size_t b = 0; b < n_bins; ++b) {
      double abs_sum = 0.0, rel_sum = 0.0;
      std::size_t n = 0;
      for (const auto& ev : evals) {
        if (!ev.ok || ev.bin_n.empty()) continue;
        abs_sum += ev.bin_abs[b];
        rel_sum += ev.bin_rel[b];
        n += ev.bin_n[b];
      }
      char row[256];
      if (n > 0) {
        std::snprintf(row, sizeof(row), "%.6f,%.6f,%zu,%.9f,%.9f", b * opt.bins, (b + 1) * opt.bins,
                      n, abs_sum / n, rel_sum / n);
        bins_json.push_back(json{{"lo", b * opt.bins},
                                 {"hi", (b + 1) * opt.bins},
                                 {"n", n},
                                 {"l1", abs_sum / n},
                                 {"abs_rel", rel_sum / n}});
      } else {
        std::snprintf(row, sizeof(row), "%.6f,%.6f,0,,", b * opt.bins, (b + 1) * opt.bins);
        bins_json.push_back(json{{"lo", b * opt.bins},
                                 {"hi", (b + 1) * opt.bins},
                                 {"n", 0},
                                 {"l1", nullptr},
                                 {"abs_rel", nullptr}});
      }
      if (run.csv_reports) bins_csv << row << "\n";
    }
    out_json["bins"] = bins_json;
  }

  if (run.json_reports)
    std::ofstream(fs::path(run.output_dir) / "report.json") << out_json.dump(2) << "\n";
  log << json{{"event", "run_end"}, {"failures", failures}}.dump() << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depth-camera noise synthesis and evaluation toolkit"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  int workers = default_workers();
  std::string global_config;
  app.add_option("--seed", seed_flag, "global seed (overrides config file seed)");
  app.add_option("--workers", workers, "worker threads (default: CAMDEPTH_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", global_config, "synthesis config file");

  camdepth::RunConfig run;
  std::string synth_log;

  auto* synth = app.add_subcommand("synth", "synthesize camera-style depth over a manifest");
  synth->add_option("--manifest", run.manifest_path, "dataset manifest")->required();
  synth->add_option("--out", run.output_dir, "output directory")->required();
  synth->add_option("--log", synth_log, "run log path (default: <out>/run_log.jsonl)");

  auto* eval = app.add_subcommand("eval", "score predictions against manifest ground truth");
  EvalOptions eopt;
  eval->add_option("--manifest", run.manifest_path, "dataset manifest")->required();
  eval->add_option("--pred-dir", eopt.pred_dir, "directory of <id>.png predictions");
  eval->add_option("--out", run.output_dir, "report output directory")->required();
  eval->add_option("--policy", eopt.policy, "valid-pixel policy: intersection | gt-valid-strict");
  eval->add_flag("--fill", eopt.fill, "hole-fill predictions before scoring (Filled protocol)");
  eval->add_option("--bins", eopt.bins, "bin width in meters for distance-binned accuracy");
  eval->add_option("--max-range", eopt.max_range, "max depth for binning (default 10 m)");
  eval->add_option("--formats", eopt.formats, "report formats: json, csv, or json,csv");

  auto* gf = app.add_subcommand("gfilter", "guided-filter a depth map (disparity domain)");
  std::string gf_guide, gf_input, gf_out;
  int gf_radius = 4;
  double gf_eps = 1e-4, gf_scale = 1000.0;
  gf->add_option("--guide", gf_guide, "guidance depth PNG")->required();
  gf->add_option("--input", gf_input, "input depth PNG")->required();
  gf->add_option("--out", gf_out, "output depth PNG")->required();
  gf->add_option("--radius", gf_radius, "window radius in pixels");
  gf->add_option("--eps", gf_eps, "regularization epsilon");
  gf->add_option("--scale", gf_scale, "stored-units-per-meter of the PNGs (default 1000)");

  auto* cloud = app.add_subcommand("cloud", "back-project depth to a PLY point cloud");
  std::string cl_depth, cl_intr, cl_rgb, cl_out, cl_mode = "binary";
  cloud->add_option("--depth", cl_depth, "depth PNG")->required();
  cloud->add_option("--intrinsics", cl_intr, "intrinsics JSON")->required();
  cloud->add_option("--rgb", cl_rgb, "optional RGB PNG for per-point color");
  cloud->add_option("--out", cl_out, "output PLY path")->required();
  cloud->add_option("--mode", cl_mode, "ascii | binary (default binary)");

  auto* traj = app.add_subcommand("traj", "trajectory smoothness metrics from CSV");
  std::vector<std::string> tr_inputs;
  std::string tr_out;
  double tr_rate = 0.0;
  traj->add_option("csv", tr_inputs, "trajectory CSV files (one method row each)")->required();
  traj->add_option("--rate", tr_rate, "sampling rate in Hz for headerless CSVs");
  traj->add_option("--out", tr_out, "output basename (writes .json and .csv)")->required();

  auto* validate = app.add_subcommand("validate", "check a manifest and its file references");
  std::string v_manifest;
  validate->add_option("--manifest", v_manifest, "dataset manifest")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    run.workers = workers;
    if (!global_config.empty()) run.pipeline = camdepth::load_pipeline_config(global_config);
    if (seed_flag) run.pipeline.seed = *seed_flag;
    run.seed = run.pipeline.seed;

    if (synth->parsed()) return cmd_synth(run, synth_log);

    if (eval->parsed()) return cmd_eval(run, eopt);

    if (gf->parsed()) {
      using namespace camdepth;
      const DepthMap guide_d = load_depth(gf_guide, gf_scale);
      const DepthMap input_d = load_depth(gf_input, gf_scale);
      GuidedFilterParams params;
      params.radius = gf_radius;
      params.epsilon = gf_eps;
      const ScalarField filtered =
          guided_filter(to_disparity(guide_d), to_disparity(input_d), params);
      DepthMap out(filtered.width, filtered.height);
      for (std::size_t i = 0; i < filtered.values.size(); ++i) {
        if (filtered.valid[i]) {
          out.values[i] = 1.0 / std::max(filtered.values[i], kDisparityFloor);
          out.valid[i] = 1;
        }
      }
      save_depth(out, gf_out, gf_scale);
      return 0;
    }

    if (cloud->parsed()) {
      using namespace camdepth;
      const Intrinsics k = load_intrinsics(cl_intr);
      const DepthMap d = load_depth(cl_depth, k.depth_scale);
      std::optional<ImageRGB> rgb;
      if (!cl_rgb.empty()) rgb = load_rgb(cl_rgb);
      PlyMode mode;
      if (cl_mode == "ascii") mode = PlyMode::ascii;
      else if (cl_mode == "binary") mode = PlyMode::binary_little_endian;
      else throw std::runtime_error("unknown PLY mode: " + cl_mode);
      write_ply(backproject(d, k, rgb ? &*rgb : nullptr), cl_out, mode);
      return 0;
    }

    if (traj->parsed()) {
      using namespace camdepth;
      json out_json;
      out_json["methods"] = json::array();
      std::ofstream csv(tr_out + ".csv");
      bool wrote_header = false;
      for (const auto& path : tr_inputs) {
        const JointTrajectory t =
            load_traj(path, tr_rate > 0.0 ? std::optional<double>(tr_rate) : std::nullopt);
        const std::vector<double> acc = mean_abs_accel(t);
        std::vector<double> jerk;
        if (t.length() >= 4) jerk = rms_jerk(t);
        const std::string method = fs::path(path).stem().string();
        if (!wrote_header) {
          csv << "method,metric";
          for (const auto& name : t.joint_names) csv << "," << name;
          csv << "\n";
          wrote_header = true;
        }
        auto write_row = [&](const char* metric, const std::vector<double>& vals) {
          csv << method << "," << metric;
          for (double v : vals) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), ",%.9f", v);
            csv << buf;
          }
          csv << "\n";
        };
        write_row("mean_abs_accel", acc);
        if (!jerk.empty()) write_row("rms_jerk", jerk);
        json m{{"method", method}, {"joints", t.joint_names}, {"mean_abs_accel", acc}};
        if (!jerk.empty()) m["rms_jerk"] = jerk;
        out_json["methods"].push_back(m);
      }
      std::ofstream(tr_out + ".json") << out_json.dump(2) << "\n";
      return 0;
    }

    if (validate->parsed()) {
      using namespace camdepth;
      const DatasetManifest m = load_manifest(v_manifest);
      const auto issues = validate_manifest(m);
      for (const auto& issue : issues) {
        std::cerr << "validate: " << (issue.sample_id.empty() ? "(manifest)" : issue.sample_id)
                  << ": " << issue.message << "\n";
      }
      std::cout << m.samples.size() << " samples, " << issues.size() << " issues\n";
      return issues.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
