#pragma once

#include "camdepth/field.hpp"

namespace camdepth {

// Working floor for disparities; a recovered disparity is clamped here before
// inversion so synthesis always yields a usable positive depth.
inline constexpr double kDisparityFloor = 1e-6;
inline constexpr double kDepthFloor = 1e-6;      // meters
inline constexpr double kScaleFloor = 1e-8;      // disparity units

// Shift/scale of the affine-invariant normalization, in disparity units.
struct NormParams {
  double shift = 0.0;
  double scale = kScaleFloor;
  bool degenerate = false;
};

struct NormalizedField {
  ScalarField field;
  NormParams params;
};

// Valid pixels map to 1 / max(depth, d_floor); holes stay invalid.
ScalarField to_disparity(const DepthMap& d, double d_floor = kDepthFloor);

// Median shift plus mean-absolute-deviation scale over valid disparities.
// Scale is floored at kScaleFloor; degenerate flags a pre-floor scale below it.
NormalizedField affine_normalize(const DepthMap& d, double d_floor = kDepthFloor);

// Least-squares fit of scale/shift mapping rel onto the reference disparity,
// refined by one re-fit that drops the worst 20% residuals. Output depth is
// 1 / clamp(s * rel + t, kDisparityFloor, inf) wherever rel is valid.
// A degenerate rel (all equal) takes a shift-only fit at the median reference
// disparity. Throws when rel and ref have no valid overlap.
DepthMap affine_recover(const ScalarField& rel, const DepthMap& ref, double d_floor = kDepthFloor);

}  // namespace camdepth
