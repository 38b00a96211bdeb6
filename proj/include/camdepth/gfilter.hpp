#pragma once

#include <cstdint>
#include <vector>

#include "camdepth/field.hpp"
#include "camdepth/rng.hpp"

namespace camdepth {

struct GuidedFilterParams {
  int radius = 4;            // window is the (2r+1)^2 square
  double epsilon = 1e-4;     // regularization, squared guidance units
  int min_valid = 4;         // windows below this joint-valid count are skipped
};

struct RescaleAugmentParams {
  std::vector<int> radii_pool = {1, 2, 4, 8, 16, 32};  // ascending, all >= 1
  double epsilon = 1e-4;
  std::string seed_tag = "rescale";
};

// Windowed sums over valid pixels, windows clipped to bounds. Integral-image
// based: cost independent of radius.
struct BoxStats {
  ScalarField sum;                // windowed sum of valid values
  std::vector<std::int64_t> count;  // windowed valid count, row-major
};
BoxStats box_stats(const ScalarField& field, int radius);

// He et al. style guided filter on masked fields. Per window over the joint
// mask: x = cov(g,a) / (var(g) + eps), y = mean(a) - x * mean(g); the output
// averages x,y over every window covering the pixel. Pixels covered by no
// window with >= min_valid joint-valid pixels copy the input through.
ScalarField guided_filter(const ScalarField& guide, const ScalarField& input,
                          const GuidedFilterParams& params);

// Stamps ground-truth metric scale onto a value-noise field: filters the
// ground-truth disparity with the value noise as guidance, at a radius drawn
// uniformly from the pool.
struct RescaleResult {
  ScalarField field;
  int radius = 0;  // the drawn radius, for run logs
};
RescaleResult guided_rescale_augment(const ScalarField& value_noise, const DepthMap& gt,
                                     const RescaleAugmentParams& params, Rng& rng);

// Caps the default pool at floor(min(W,H)/8), keeping at least the smallest entry.
std::vector<int> clamp_radii_pool(const std::vector<int>& pool, int width, int height);

}  // namespace camdepth
