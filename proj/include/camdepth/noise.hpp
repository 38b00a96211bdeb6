#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "camdepth/field.hpp"
#include "camdepth/gfilter.hpp"
#include "camdepth/rng.hpp"

namespace camdepth {

// Per-pixel hole probability in [0, 1].
struct HoleProbField {
  int width = 0;
  int height = 0;
  std::vector<double> prob;

  HoleProbField() = default;
  HoleProbField(int w, int h, double p = 0.0)
      : width(w), height(h), prob(static_cast<std::size_t>(w) * h, p) {
    if (w < 1 || h < 1) throw std::invalid_argument("HoleProbField: dimensions must be >= 1");
  }
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

// ---- value-noise stages ----

// Stereo-style subpixel disparity quantization through a virtual rig.
struct QuantizationStage {
  double virtual_focal = 600.0;    // px
  double virtual_baseline = 0.05;  // m
  double subpixel_step = 0.25;     // px
};

// Additive Gaussian depth perturbation with distance-dependent sigma.
struct DepthGaussianStage {
  double sigma0 = 0.002;  // m
  double sigma1 = 0.001;  // m^-1, scales z^2
};

// Resampling through a smooth random per-pixel offset field.
struct LateralWarpStage {
  double amplitude = 1.0;  // px
  int grid = 16;           // px, coarse cell size of the offset field
};

using ValueStage = std::variant<QuantizationStage, DepthGaussianStage, LateralWarpStage>;

// ---- hole layers ----

struct EdgeHoleLayer {
  double grad_threshold = 0.1;  // disparity-gradient magnitude
  int dilate_radius = 1;
  double prob = 1.0;
};

struct DarkHoleLayer {
  double lum_threshold = 20.0;  // BT.601 luma
  double prob = 1.0;
};

struct SpeckleHoleLayer {
  int grid = 16;           // px, coarse cell size of the Gaussian field
  double threshold = 1.0;  // field value above which the layer fires
  double prob = 1.0;
};

enum class BandSide { left, right, top, bottom };

struct BorderBandLayer {
  BandSide side = BandSide::left;
  int width = 8;  // px
};

using HoleLayer = std::variant<EdgeHoleLayer, DarkHoleLayer, SpeckleHoleLayer, BorderBandLayer>;

struct HighFreqParams {
  double amplitude = 0.0;    // relative, multiplicative
  double probability = 0.0;  // per-pixel
};

// Declarative synthesis chain: value stages -> guided rescale -> high-freq ->
// hole layers -> composition.
struct NoisePipelineConfig {
  std::vector<ValueStage> value_stages;
  RescaleAugmentParams rescale;
  HighFreqParams high_freq;
  std::vector<HoleLayer> hole_layers;
  double hole_threshold = 0.5;
  std::uint64_t seed = 0;

  void check() const;
};

// ---- field import/export ----

// 16-bit PNG (value = u / png_scale) or the raw "DFG1" float grid. PNG zeros
// are holes; DFG1 grids are fully valid.
ScalarField import_scalar_field(const std::string& path, double png_scale = 1000.0);
void export_scalar_field_dfg(const ScalarField& field, const std::string& path);

// Probability fields: PNG maps u / 65535; raw imports are range-checked to [0, 1].
HoleProbField import_prob_field(const std::string& path);
void export_prob_field_png(const HoleProbField& field, const std::string& path);

// ---- generators ----

// Union of per-layer probabilities: H = 1 - prod_j (1 - h_j).
HoleProbField gen_hole_map(const ImageRGB& rgb, const DepthMap& gt,
                           const std::vector<HoleLayer>& layers, Rng& rng);

// Starts from ground-truth disparity (holes nearest-filled first), applies the
// stages in order, then re-masks to the ground-truth validity.
ScalarField gen_value_noise(const ImageRGB& rgb, const DepthMap& gt,
                            const std::vector<ValueStage>& stages, Rng& rng,
                            double d_floor = 1e-6);

// Each pixel independently scaled by (1 + U(-amplitude, amplitude)) with the
// given probability. Draw order is row-major, so results are scheduling-free.
ScalarField add_high_freq_noise(const ScalarField& field, double amplitude, double probability,
                                Rng& rng);

// Hole prob < threshold keeps depth = 1 / max(disparity, floor); prob >=
// threshold (boundary included) is a hole.
DepthMap compose_camera_depth(const ScalarField& value_field, const HoleProbField& hole,
                              double threshold = 0.5);

// Full chain; deterministic given (cfg.seed, sample_index). The drawn rescale
// radius is reported for run logs.
struct SynthesisResult {
  DepthMap depth;
  int rescale_radius = 0;
};
SynthesisResult synthesize(const ImageRGB& rgb, const DepthMap& gt, const NoisePipelineConfig& cfg,
                           std::uint64_t sample_index = 0);

// Every hole takes its nearest valid pixel's value (Euclidean distance, ties
// broken by donor row-major order). Idempotent; output fully valid.
DepthMap fill_holes_nearest(const DepthMap& d);
ScalarField fill_holes_nearest(const ScalarField& f);

}  // namespace camdepth
