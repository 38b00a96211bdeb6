// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in the checks themselves.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "camdepth/cloud.hpp"
#include "camdepth/gfilter.hpp"
#include "camdepth/metrics.hpp"
#include "camdepth/noise.hpp"
#include "camdepth/normalize.hpp"
#include "camdepth/png_io.hpp"
#include "camdepth/traj.hpp"
#include "cli_fixture.hpp"
#include "oracles.hpp"
#include "ply_reader.hpp"

namespace fs = std::filesystem;
using namespace camdepth;
using nlohmann::json;

namespace {

int g_failures = 0;

void require(bool cond, const std::string& what) {
  if (!cond) throw std::runtime_error(what);
}

void run_criterion(int num, const char* name, const std::function<void()>& fn) {
  try {
    fn();
    std::printf("[PASS] criterion %2d: %s\n", num, name);
  } catch (const std::exception& e) {
    ++g_failures;
    std::printf("[FAIL] criterion %2d: %s -- %s\n", num, name, e.what());
  }
  std::fflush(stdout);
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// --------------------------------------------------------------------------

void criterion1_gfilter_oracle() {
  Rng rng = derive_rng(1001, 0, "acc-gf-oracle");
  const double t0 = now_seconds();
  double max_diff = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ScalarField g = testutil::random_field(rng, 16, 16, 0.0, 1.0, trial % 3 ? 0.2 : 0.0);
    const ScalarField a = testutil::random_field(rng, 16, 16, 0.0, 1.0, trial % 3 ? 0.2 : 0.0);
    GuidedFilterParams p;
    p.radius = 1 + static_cast<int>(rng.uniform_index(4));
    p.epsilon = (trial % 2) ? 1e-2 : 1e-4;
    const ScalarField out = guided_filter(g, a, p);
    const ScalarField ref = oracle::guided_filter_naive(g, a, p);
    require(out.valid == ref.valid, "validity mask differs from oracle");
    for (std::size_t i = 0; i < out.values.size(); ++i)
      if (out.valid[i]) max_diff = std::max(max_diff, std::abs(out.values[i] - ref.values[i]));
  }
  const double elapsed = now_seconds() - t0;
  require(max_diff < 1e-6, "max abs diff vs oracle = " + std::to_string(max_diff));
  require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s >= 1 s");
}

void criterion2_gfilter_identities() {
  Rng rng = derive_rng(1001, 1, "acc-gf-ident");
  const ScalarField f = testutil::random_field(rng, 20, 16, 0.2, 2.0);

  for (int r : {0, 1, 2, 4}) {
    GuidedFilterParams p;
    p.radius = r;
    p.epsilon = 1e-12;
    p.min_valid = 1;
    const ScalarField out = guided_filter(f, f, p);
    for (std::size_t i = 0; i < f.values.size(); ++i)
      require(std::abs(out.values[i] - f.values[i]) < 1e-6,
              "guide==input identity broken at radius " + std::to_string(r));
  }

  ScalarField cg(12, 12, 3.75), ca(12, 12, -1.25);
  GuidedFilterParams cp;
  cp.radius = 2;
  cp.epsilon = 0.1;
  const ScalarField cout = guided_filter(cg, ca, cp);
  for (double v : cout.values)
    require(v == -1.25, "constant guide/input not exact");

  const ScalarField g = testutil::random_field(rng, 14, 14, 0.1, 1.0);
  const ScalarField a = testutil::random_field(rng, 14, 14, 0.0, 2.0);
  GuidedFilterParams ap;
  ap.radius = 2;
  ap.epsilon = 0.0;
  const ScalarField base = guided_filter(g, a, ap);
  for (double scale : {2.5, -1.5}) {
    ScalarField g2 = g;
    for (auto& v : g2.values) v = scale * v + 0.4;
    const ScalarField out = guided_filter(g2, a, ap);
    for (std::size_t i = 0; i < out.values.size(); ++i)
      require(std::abs(out.values[i] - base.values[i]) < 1e-6, "affine-guide invariance broken");
  }
}

void criterion3_gfilter_scaling() {
  Rng rng = derive_rng(1001, 2, "acc-gf-scaling");
  const ScalarField g = testutil::random_field(rng, 640, 480, 0.0, 1.0);
  const ScalarField a = testutil::random_field(rng, 640, 480, 0.0, 1.0);

  volatile double sink = 0.0;
  auto time_radius = [&](int radius) {
    GuidedFilterParams p;
    p.radius = radius;
    p.epsilon = 1e-4;
    guided_filter(g, a, p);  // warm-up
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const double t0 = now_seconds();
      const ScalarField out = guided_filter(g, a, p);
      best = std::min(best, now_seconds() - t0);
      sink = sink + out.values[12345];
    }
    return best;
  };

  const double t2 = time_radius(2);
  const double t32 = time_radius(32);
  require(t32 <= 1.5 * t2, "radius-32 time " + std::to_string(t32) + " s vs radius-2 " +
                               std::to_string(t2) + " s exceeds 1.5x");
}

void criterion4_affine_roundtrip() {
  Rng rng = derive_rng(1001, 3, "acc-affine");
  for (int trial = 0; trial < 100; ++trial) {
    const double holes = (trial % 2) ? 0.3 : 0.0;
    const DepthMap d = testutil::random_depth(rng, 16, 12, 0.4, 5.0, holes);
    if (d.count_valid() == 0) continue;
    const NormalizedField n = affine_normalize(d);
    const DepthMap back = affine_recover(n.field, d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d.valid[i]) continue;
      require(back.valid[i] != 0, "lost validity in roundtrip");
      const double rel = std::abs(back.values[i] - d.values[i]) / d.values[i];
      require(rel < 1e-6, "roundtrip relative error " + std::to_string(rel));
    }
  }

  // degenerate constant maps: shift-only path, no error
  DepthMap flat(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) flat.set(x, y, 1.75);
  const NormalizedField n = affine_normalize(flat);
  require(n.params.degenerate, "constant map not flagged degenerate");
  const DepthMap back = affine_recover(n.field, flat);
  for (std::size_t i = 0; i < flat.size(); ++i)
    require(std::abs(back.values[i] - 1.75) < 1e-9, "shift-only fit wrong on constant map");
}

void criterion5_composition() {
  Rng data_rng = derive_rng(1001, 4, "acc-compose");
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    NoisePipelineConfig cfg;
    cfg.seed = 3000 + trial;
    cfg.rescale.radii_pool = {1, 2, 4};
    cfg.rescale.epsilon = 1e-4;
    if (trial % 2) cfg.value_stages.push_back(DepthGaussianStage{0.002, 0.001});
    if (trial % 3) cfg.high_freq = {0.02, 0.5};
    cfg.hole_layers.push_back(DarkHoleLayer{30.0 + 10.0 * (trial % 4), 0.8});
    cfg.hole_layers.push_back(SpeckleHoleLayer{4 + static_cast<int>(trial % 3), 0.9, 0.9});
    if (trial % 4 == 0) cfg.hole_layers.push_back(BorderBandLayer{BandSide::left, 2});
    cfg.hole_layers.push_back(EdgeHoleLayer{0.25, 1, 0.7});

    const ImageRGB rgb = testutil::random_rgb(data_rng, 32, 24);
    const DepthMap gt = testutil::random_depth(data_rng, 32, 24, 0.5, 4.0, trial % 5 ? 0.1 : 0.0);
    const SynthesisResult res = synthesize(rgb, gt, cfg, trial);

    Rng hole_rng = derive_rng(cfg.seed, trial, "hole");
    const HoleProbField h = gen_hole_map(rgb, gt, cfg.hole_layers, hole_rng);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const bool expect_hole = h.prob[i] >= 0.5;
      require((res.depth.valid[i] == 0) == expect_hole,
              "hole set mismatch at pixel " + std::to_string(i));
    }
  }

  // boundary: probability exactly 0.5 is a hole under the strict comparison
  ScalarField disp(4, 4, 1.0);
  const DepthMap boundary = compose_camera_depth(disp, HoleProbField(4, 4, 0.5), 0.5);
  require(boundary.count_valid() == 0, "boundary probability 0.5 not treated as a hole");
}

void criterion6_metric_oracles() {
  Rng rng = derive_rng(1001, 5, "acc-metrics");
  for (int trial = 0; trial < 10; ++trial) {
    const DepthMap gt = testutil::random_depth(rng, 32, 32, 0.5, 5.0, 0.2);
    const DepthMap pred = testutil::random_depth(rng, 32, 32, 0.5, 5.0, 0.2);

    const MetricReport r = depth_metrics(pred, gt);
    const oracle::Metrics m = oracle::depth_metrics_naive(pred, gt);
    require(std::abs(r.l1 - m.l1) < 1e-9, "L1 vs oracle");
    require(std::abs(r.rmse - m.rmse) < 1e-9, "RMSE vs oracle");
    require(std::abs(r.abs_rel - m.abs_rel) < 1e-9, "AbsRel vs oracle");
    require(std::abs(r.delta_half - m.delta_half) < 1e-9, "delta_half vs oracle");
    require(std::abs(r.delta_one - m.delta_one) < 1e-9, "delta_one vs oracle");

    ScalarField logits(32, 32);
    for (auto& v : logits.values) v = rng.uniform(-8.0, 8.0);
    require(std::abs(bce_hole_loss(logits, gt) - oracle::bce_naive(logits, gt)) < 1e-9,
            "BCE vs oracle");

    const NormalizedField n = affine_normalize(gt);
    ScalarField rel(32, 32);
    for (auto& v : rel.values) v = rng.uniform(-2.0, 2.0);
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < rel.values.size(); ++i) {
      if (!n.field.valid[i]) continue;
      sum += std::abs(n.field.values[i] - rel.values[i]);
      ++cnt;
    }
    require(std::abs(l1_normalized_loss(rel, gt) - sum / cnt) < 1e-9, "normalized L1 vs oracle");

    require(std::abs(grad_loss(pred, gt) - oracle::grad_loss_naive(pred, gt)) < 1e-9,
            "grad loss vs oracle");
    require(std::abs(total_loss(pred, gt) -
                     (oracle::l1_disparity_naive(pred, gt) + oracle::grad_loss_naive(pred, gt))) <
                1e-9,
            "total loss vs oracle");
  }

  // analytic cases
  const DepthMap gt = testutil::random_depth(rng, 16, 16, 0.5, 4.0);
  DepthMap scaled = gt;
  for (auto& v : scaled.values) v *= 1.1;
  const MetricReport r = depth_metrics(scaled, gt);
  require(std::abs(r.abs_rel - 0.1) < 1e-9, "AbsRel of 1.1*gt is not 0.1");
  require(r.delta_half == 1.0, "delta_half of 1.1*gt is not 1");

  const ScalarField zeros(16, 16, 0.0);
  require(std::abs(bce_hole_loss(zeros, gt) - std::log(2.0)) < 1e-9, "BCE at zero logits != ln 2");
}

void criterion7_bin_consistency() {
  Rng rng = derive_rng(1001, 6, "acc-bins");
  for (int trial = 0; trial < 10; ++trial) {
    const DepthMap gt = testutil::random_depth(rng, 24, 24, 0.3, 7.5, 0.15);
    const DepthMap pred = testutil::random_depth(rng, 24, 24, 0.3, 7.5, 0.15);
    const BinnedReport br = binned_accuracy(pred, gt, 0.5, 8.0);
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& b : br.bins) {
      if (b.n == 0) continue;
      weighted += *b.l1 * b.n;
      total += b.n;
    }
    const MetricReport r = depth_metrics(pred, gt);
    require(total == r.n_pixels, "bin counts do not cover the evaluation set");
    require(std::abs(weighted / total - r.l1) < 1e-9, "weighted bin L1 != global L1");
  }
}

void criterion8_cloud_roundtrip(const testutil::TempDir& tmp) {
  Rng rng = derive_rng(1001, 7, "acc-cloud");
  Intrinsics k;
  k.fx = 48.0;
  k.fy = 50.0;
  k.cx = 16.0;
  k.cy = 12.0;
  k.width = 32;
  k.height = 24;
  k.depth_scale = 1000.0;

  for (int trial = 0; trial < 5; ++trial) {
    const DepthMap d = testutil::random_depth(rng, 32, 24, 0.4, 6.0, 0.2);
    const PointCloud c = backproject(d, k);
    const auto px = project(c, k);
    std::size_t idx = 0;
    for (int v = 0; v < d.height; ++v) {
      for (int u = 0; u < d.width; ++u) {
        if (!d.is_valid(u, v)) continue;
        require(std::abs(px[idx].u - u) < 1e-4 && std::abs(px[idx].v - v) < 1e-4,
                "pixel center not recovered within 1e-4 px");
        ++idx;
      }
    }
  }

  const DepthMap d = testutil::random_depth(rng, 32, 24, 0.4, 6.0, 0.3);
  const ImageRGB rgb = testutil::random_rgb(rng, 32, 24);
  const PointCloud c = backproject(d, k, &rgb);
  const std::string path = tmp.file("acc.ply");
  write_ply(c, path, PlyMode::binary_little_endian);
  const testply::PlyData ply = testply::read_ply_independent(path);
  require(ply.vertex_count == c.points.size(), "vertex count mismatch");
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    for (int j = 0; j < 3; ++j) {
      const float expected = static_cast<float>(c.points[i][j]);
      require(std::memcmp(&ply.xyz[i * 3 + j], &expected, 4) == 0,
              "binary float not bit-identical after independent reread");
    }
    require(ply.rgb[i * 3] == c.colors[i][0] && ply.rgb[i * 3 + 1] == c.colors[i][1] &&
                ply.rgb[i * 3 + 2] == c.colors[i][2],
            "color bytes differ after reread");
  }
}

void criterion9_trajectory() {
  auto make = [](double (*f)(double), int n, double dt) {
    JointTrajectory t;
    t.joint_names = {"j1"};
    t.joints.resize(1);
    for (int k = 0; k < n; ++k) {
      t.timestamps.push_back(k * dt);
      t.joints[0].push_back(f(k * dt));
    }
    return t;
  };

  // q = 0.5 * alpha * t^2 with alpha = 4 (dyadic): exact acceleration, zero jerk
  const JointTrajectory quad = make([](double x) { return 2.0 * x * x; }, 12, 0.25);
  require(mean_abs_accel(quad)[0] == 4.0, "quadratic acceleration not exact");
  require(rms_jerk(quad)[0] == 0.0, "quadratic jerk not exactly zero");

  const JointTrajectory cubic = make([](double x) { return x * x * x; }, 12, 0.25);
  require(rms_jerk(cubic)[0] == 6.0, "cubic jerk not exactly 6");

  Rng rng = derive_rng(1001, 8, "acc-traj");
  JointTrajectory t;
  t.joint_names = {"j1"};
  t.joints.resize(1);
  for (int kk = 0; kk < 16; ++kk) {
    t.timestamps.push_back(kk * 0.25);
    t.joints[0].push_back(rng.uniform(-1.0, 1.0));
  }
  const double acc = mean_abs_accel(t)[0];
  const double jerk = rms_jerk(t)[0];
  for (double c : {2.0, 0.5, 4.0}) {
    JointTrajectory scaled = t;
    for (auto& ts : scaled.timestamps) ts *= c;
    require(std::abs(mean_abs_accel(scaled)[0] - acc / (c * c)) < 1e-9 * std::abs(acc),
            "1/c^2 acceleration scaling broken");
    require(std::abs(rms_jerk(scaled)[0] - jerk / (c * c * c)) < 1e-9 * std::abs(jerk),
            "1/c^3 jerk scaling broken");
  }
}

void criterion10_end_to_end_determinism(const testutil::TempDir& tmp) {
  const std::string manifest = clifix::write_dataset(tmp, 6, 32, 24, 0.1, 4242);
  const std::string busy = clifix::write_busy_config(tmp, 99);

  const auto w1 = clifix::run_cli(tmp, "--workers 1 --config " + busy + " synth --manifest " +
                                           manifest + " --out " + tmp.file("w1") + " --log " +
                                           tmp.file("w1.log"));
  const auto w8 = clifix::run_cli(tmp, "--workers 8 --config " + busy + " synth --manifest " +
                                           manifest + " --out " + tmp.file("w8") + " --log " +
                                           tmp.file("w8.log"));
  require(w1.exit_code == 0 && w8.exit_code == 0, "synth failed");

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(tmp.file("w1"))) {
    const auto name = entry.path().filename().string();
    require(clifix::slurp(entry.path().string()) == clifix::slurp(tmp.file("w8/" + name)),
            "output trees differ at " + name);
    ++compared;
  }
  require(compared == 6, "expected 6 synthesized files");

  const std::string ident = clifix::write_identity_config(tmp);
  const auto id_run = clifix::run_cli(tmp, "--config " + ident + " synth --manifest " + manifest +
                                               " --out " + tmp.file("ident"));
  require(id_run.exit_code == 0, "identity synth failed");
  for (int i = 0; i < 6; ++i) {
    const std::string id = "s" + std::to_string(i);
    const GrayImage16 gt = load_gray16(tmp.file(id + "_gt.png"));
    const GrayImage16 out = load_gray16(tmp.file("ident/" + id + ".png"));
    for (std::size_t p = 0; p < gt.pixels.size(); ++p) {
      if (gt.pixels[p] == 0) continue;  // identity config fills gt holes
      require(std::abs(int(gt.pixels[p]) - int(out.pixels[p])) <= 1,
              "identity synth deviates beyond one quantization step");
    }
  }
}

void criterion11_table_format(const testutil::TempDir& tmp) {
  // 5-sample fixture: preds = gt with holes and a known multiplicative bias.
  const int w = 20, h = 15;
  const std::string manifest = clifix::write_dataset(tmp, 5, w, h, 0.0, 777);
  fs::create_directories(tmp.file("pred"));
  Rng rng = derive_rng(777, 1, "acc-table");
  for (int i = 0; i < 5; ++i) {
    const std::string id = "s" + std::to_string(i);
    DepthMap pred = load_depth(tmp.file(id + "_gt.png"), 1000.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (rng.uniform() < 0.25) {
          pred.set_hole(x, y);
        } else {
          // re-quantize a biased value so the PNG stays exact
          const double biased = pred.at(x, y) * rng.uniform(0.9, 1.2);
          pred.set(x, y, std::floor(biased * 1000.0 + 0.5) / 1000.0);
        }
      }
    }
    save_depth(pred, tmp.file("pred/" + id + ".png"), 1000.0);
  }

  for (const bool fill : {false, true}) {
    const std::string out_dir = tmp.file(fill ? "rep_filled" : "rep_holed");
    const std::string flags = fill ? " --fill" : "";
    const auto res = clifix::run_cli(tmp, "eval --manifest " + manifest + " --pred-dir " +
                                              tmp.file("pred") + " --out " + out_dir + flags);
    require(res.exit_code == 0, "eval failed");

    // column set mirrors the scorecard: L1, RMSE, AbsRel, delta_0.5, delta_1
    std::istringstream csv(clifix::slurp(out_dir + "/report.csv"));
    std::string header;
    std::getline(csv, header);
    require(header == "id,l1,rmse,abs_rel,delta_half,delta_one,coverage,n_pixels",
            "unexpected CSV column set: " + header);

    // loop-oracle aggregate on the loaded fixture files
    double sum_l1 = 0, sum_rmse = 0, sum_rel = 0, sum_dh = 0, sum_d1 = 0, sum_cov = 0;
    for (int i = 0; i < 5; ++i) {
      const std::string id = "s" + std::to_string(i);
      const DepthMap gt = load_depth(tmp.file(id + "_gt.png"), 1000.0);
      DepthMap pred = load_depth(tmp.file("pred/" + id + ".png"), 1000.0);
      if (fill) pred = oracle::fill_nearest_naive(pred);
      const oracle::Metrics m = oracle::depth_metrics_naive(pred, gt);
      sum_l1 += m.l1;
      sum_rmse += m.rmse;
      sum_rel += m.abs_rel;
      sum_dh += m.delta_half;
      sum_d1 += m.delta_one;
      sum_cov += m.coverage;
    }

    const json rep = json::parse(clifix::slurp(out_dir + "/report.json"));
    const auto& agg = rep["aggregate"];
    require(std::abs(agg["l1"].get<double>() - sum_l1 / 5) < 1e-9, "aggregate L1 mismatch");
    require(std::abs(agg["rmse"].get<double>() - sum_rmse / 5) < 1e-9, "aggregate RMSE mismatch");
    require(std::abs(agg["abs_rel"].get<double>() - sum_rel / 5) < 1e-9,
            "aggregate AbsRel mismatch");
    require(std::abs(agg["delta_half"].get<double>() - sum_dh / 5) < 1e-9,
            "aggregate delta_half mismatch");
    require(std::abs(agg["delta_one"].get<double>() - sum_d1 / 5) < 1e-9,
            "aggregate delta_one mismatch");
    require(std::abs(agg["coverage"].get<double>() - sum_cov / 5) < 1e-9,
            "aggregate coverage mismatch");
    if (fill)
      require(agg["coverage"].get<double>() == 1.0, "filled protocol should have full coverage");
    else
      require(agg["coverage"].get<double>() < 1.0, "holed protocol should report coverage < 1");
  }
}

}  // namespace

int main() {
  testutil::TempDir tmp("acceptance");

  run_criterion(1, "guided-filter oracle equivalence (50 masked pairs, < 1e-6, < 1 s)",
                criterion1_gfilter_oracle);
  run_criterion(2, "guided-filter identities (self-guide, constant, affine guide)",
                criterion2_gfilter_identities);
  run_criterion(3, "guided-filter O(N) scaling (radius 32 within 1.5x of radius 2)",
                criterion3_gfilter_scaling);
  run_criterion(4, "affine normalize/recover roundtrip (100 maps, 1e-6 relative)",
                criterion4_affine_roundtrip);
  run_criterion(5, "composition hole set == thresholded hole map, strict boundary",
                criterion5_composition);
  run_criterion(6, "metric and loss oracles (1e-9) plus analytic cases", criterion6_metric_oracles);
  run_criterion(7, "count-weighted bin L1 equals global L1 (1e-9)", criterion7_bin_consistency);
  run_criterion(8, "cloud roundtrip (1e-4 px) and bit-exact PLY reread",
                [&] { criterion8_cloud_roundtrip(tmp); });
  run_criterion(9, "trajectory exactness and time-rescaling laws", criterion9_trajectory);
  run_criterion(10, "end-to-end synth determinism across worker counts",
                [&] { criterion10_end_to_end_determinism(tmp); });
  run_criterion(11, "scorecard column set and 5-sample aggregate vs loop oracle (1e-9)",
                [&] { criterion11_table_format(tmp); });

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
