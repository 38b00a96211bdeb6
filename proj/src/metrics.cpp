#include "camdepth/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "camdepth/normalize.hpp"

namespace camdepth {

std::string to_string(ValidPolicy p) {
  return p == ValidPolicy::intersection ? "intersection" : "gt-valid-strict";
}

ValidPolicy valid_policy_from_string(const std::string& s) {
  if (s == "intersection") return ValidPolicy::intersection;
  if (s == "gt-valid-strict" || s == "gt-strict") return ValidPolicy::gt_valid_strict;
  throw std::invalid_argument("unknown valid-pixel policy: " + s);
}

namespace {

constexpr double kDeltaHalfThreshold = 1.118033988749894848;  // 1.25^0.5
constexpr double kDeltaOneThreshold = 1.25;

void check_dims(const DepthMap& a, const DepthMap& b, const char* op) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

}  // namespace

MetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt, ValidPolicy policy) {
  check_dims(pred, gt, "depth_metrics");

  std::size_t n_gt = 0, n_joint = 0;
  double sum_abs = 0.0, sum_sq = 0.0, sum_rel = 0.0;
  std::size_t pass_half = 0, pass_one = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid[i]) continue;
    ++n_gt;
    if (!pred.valid[i]) continue;
    ++n_joint;
    const double z = gt.values[i], zp = pred.values[i];
    const double err = std::abs(zp - z);
    sum_abs += err;
    sum_sq += (zp - z) * (zp - z);
    sum_rel += err / z;
    const double ratio = std::max(zp / z, z / zp);
    if (ratio < kDeltaHalfThreshold) ++pass_half;
    if (ratio < kDeltaOneThreshold) ++pass_one;
  }
  if (n_gt == 0) throw std::runtime_error("depth_metrics: gt has no valid pixels");
  if (n_joint == 0) throw std::runtime_error("depth_metrics: empty evaluation set");

  MetricReport r;
  r.policy = policy;
  r.n_pixels = n_joint;
  r.l1 = sum_abs / n_joint;
  r.rmse = std::sqrt(sum_sq / n_joint);
  r.abs_rel = sum_rel / n_joint;
  const double delta_denom =
      static_cast<double>(policy == ValidPolicy::intersection ? n_joint : n_gt);
  r.delta_half = pass_half / delta_denom;
  r.delta_one = pass_one / delta_denom;
  r.coverage = static_cast<double>(n_joint) / n_gt;
  return r;
}

BinnedReport binned_accuracy(const DepthMap& pred, const DepthMap& gt, double bin_width,
                             double max_range) {
  check_dims(pred, gt, "binned_accuracy");
  if (!(bin_width > 0.0)) throw std::invalid_argument("binned_accuracy: bin_width must be > 0");
  if (!(max_range > 0.0)) throw std::invalid_argument("binned_accuracy: max_range must be > 0");

  const std::size_t n_bins = static_cast<std::size_t>(std::ceil(max_range / bin_width));
  std::vector<double> sum_abs(n_bins, 0.0), sum_rel(n_bins, 0.0);
  std::vector<std::size_t> counts(n_bins, 0);

  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid[i] || !pred.valid[i]) continue;
    const double z = gt.values[i];
    if (z >= max_range) continue;
    const std::size_t k = std::min(static_cast<std::size_t>(z / bin_width), n_bins - 1);
    const double err = std::abs(pred.values[i] - z);
    sum_abs[k] += err;
    sum_rel[k] += err / z;
    ++counts[k];
  }

  BinnedReport report;
  report.bin_width = bin_width;
  report.bins.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    DepthBin& b = report.bins[k];
    b.lo = k * bin_width;
    b.hi = (k + 1) * bin_width;
    b.n = counts[k];
    if (counts[k] > 0) {
      b.l1 = sum_abs[k] / counts[k];
      b.abs_rel = sum_rel[k] / counts[k];
    }
  }
  return report;
}

double bce_hole_loss(const ScalarField& logits, const DepthMap& gt) {
  if (logits.width != gt.width || logits.height != gt.height)
    throw std::invalid_argument("bce_hole_loss: dimension mismatch");

  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < logits.values.size(); ++i) {
    if (!logits.valid[i]) continue;
    const double x = std::clamp(logits.values[i], -30.0, 30.0);
    const double y = gt.valid[i] ? 0.0 : 1.0;  // target 1 marks a hole
    // Stable form of -[y log sigma(x) + (1-y) log(1 - sigma(x))].
    sum += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
    ++n;
  }
  if (n == 0) throw std::runtime_error("bce_hole_loss: no valid logits");
  return sum / n;
}

double l1_normalized_loss(const ScalarField& pred_rel, const DepthMap& gt) {
  if (pred_rel.width != gt.width || pred_rel.height != gt.height)
    throw std::invalid_argument("l1_normalized_loss: dimension mismatch");

  const NormalizedField norm = affine_normalize(gt);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred_rel.values.size(); ++i) {
    if (!norm.field.valid[i] || !pred_rel.valid[i]) continue;
    sum += std::abs(norm.field.values[i] - pred_rel.values[i]);
    ++n;
  }
  if (n == 0) throw std::runtime_error("l1_normalized_loss: no valid pixels");
  return sum / n;
}

double grad_loss(const DepthMap& pred, const DepthMap& gt) {
  check_dims(pred, gt, "grad_loss");

  const ScalarField dp = to_disparity(pred);
  const ScalarField dg = to_disparity(gt);
  const int w = gt.width, h = gt.height;

  auto err_at = [&](std::size_t i) { return dp.values[i] - dg.values[i]; };
  auto joint = [&](std::size_t i) { return dp.valid[i] && dg.valid[i]; };

  double sum_x = 0.0, sum_y = 0.0;
  std::size_t nx = 0, ny = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!joint(i)) continue;
      if (x + 1 < w && joint(i + 1)) {
        sum_x += std::abs(err_at(i + 1) - err_at(i));
        ++nx;
      }
      if (y + 1 < h && joint(i + w)) {
        sum_y += std::abs(err_at(i + w) - err_at(i));
        ++ny;
      }
    }
  }
  if (nx == 0 && ny == 0) throw std::runtime_error("grad_loss: no valid difference pairs");
  // Each direction contributes its own mean; an empty direction contributes 0.
  return (nx ? sum_x / nx : 0.0) + (ny ? sum_y / ny : 0.0);
}

double total_loss(const DepthMap& pred, const DepthMap& gt) {
  check_dims(pred, gt, "total_loss");

  const ScalarField dp = to_disparity(pred);
  const ScalarField dg = to_disparity(gt);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < dp.values.size(); ++i) {
    if (!dp.valid[i] || !dg.valid[i]) continue;
    sum += std::abs(dp.values[i] - dg.values[i]);
    ++n;
  }
  if (n == 0) throw std::runtime_error("total_loss: empty evaluation set");
  return sum / n + grad_loss(pred, gt);
}

}  // namespace camdepth
