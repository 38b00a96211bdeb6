#pragma once

#include <optional>
#include <string>
#include <vector>

#include "camdepth/field.hpp"

namespace camdepth {

enum class ValidPolicy {
  intersection,     // evaluate gt-valid AND pred-valid pixels
  gt_valid_strict,  // delta denominators use all gt-valid pixels; pred holes fail
};

std::string to_string(ValidPolicy p);
ValidPolicy valid_policy_from_string(const std::string& s);

// Table-style depth scorecard. L1/RMSE are in meters; deltas use the 1.25^t
// ratio convention with a strict '<'.
struct MetricReport {
  double l1 = 0.0;
  double rmse = 0.0;
  double abs_rel = 0.0;
  double delta_half = 0.0;
  double delta_one = 0.0;
  double coverage = 0.0;
  std::size_t n_pixels = 0;  // jointly-valid pixels entering L1/RMSE/AbsRel
  ValidPolicy policy = ValidPolicy::intersection;
};

MetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           ValidPolicy policy = ValidPolicy::intersection);

// Distance-binned accuracy over [k*w, (k+1)*w) up to max_range; pixels beyond
// max_range are dropped. Empty bins carry n = 0 and unset metrics.
struct DepthBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  std::optional<double> l1;
  std::optional<double> abs_rel;
};

struct BinnedReport {
  double bin_width = 0.0;
  std::vector<DepthBin> bins;
};

BinnedReport binned_accuracy(const DepthMap& pred, const DepthMap& gt, double bin_width,
                             double max_range);

// Negative log-likelihood of the hole mask under per-pixel logits; target is 1
// where gt is a hole. Logits are clamped to +-30 before the sigmoid.
double bce_hole_loss(const ScalarField& logits, const DepthMap& gt);

// Mean absolute error between a relative prediction and the affine-normalized
// ground truth, over jointly valid pixels.
double l1_normalized_loss(const ScalarField& pred_rel, const DepthMap& gt);

// Mean |forward x-difference| + mean |forward y-difference| of the disparity
// error; pairs touching holes are skipped.
double grad_loss(const DepthMap& pred, const DepthMap& gt);

// Disparity-space L1 plus the gradient loss, unweighted.
double total_loss(const DepthMap& pred, const DepthMap& gt);

}  // namespace camdepth
