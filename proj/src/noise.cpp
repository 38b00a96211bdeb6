#include "camdepth/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "camdepth/normalize.hpp"
#include "camdepth/png_io.hpp"

namespace camdepth {

namespace {

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
}

void check_pos(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

}  // namespace

void NoisePipelineConfig::check() const {
  for (const auto& stage : value_stages) {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, QuantizationStage>) {
            check_pos(s.virtual_focal, "quantization virtual_focal");
            check_pos(s.virtual_baseline, "quantization virtual_baseline");
            check_pos(s.subpixel_step, "quantization subpixel_step");
          } else if constexpr (std::is_same_v<T, DepthGaussianStage>) {
            if (s.sigma0 < 0.0 || s.sigma1 < 0.0)
              throw std::invalid_argument("depth_gaussian sigmas must be >= 0");
          } else {
            if (s.amplitude < 0.0) throw std::invalid_argument("lateral_warp amplitude must be >= 0");
            if (s.grid < 1) throw std::invalid_argument("lateral_warp grid must be >= 1");
          }
        },
        stage);
  }
  for (const auto& layer : hole_layers) {
    std::visit(
        [](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, EdgeHoleLayer>) {
            check_prob(l.prob, "edge prob");
            if (l.dilate_radius < 0) throw std::invalid_argument("edge dilate_radius must be >= 0");
            if (l.grad_threshold < 0.0)
              throw std::invalid_argument("edge grad_threshold must be >= 0");
          } else if constexpr (std::is_same_v<T, DarkHoleLayer>) {
            check_prob(l.prob, "dark prob");
          } else if constexpr (std::is_same_v<T, SpeckleHoleLayer>) {
            check_prob(l.prob, "speckle prob");
            if (l.grid < 1) throw std::invalid_argument("speckle grid must be >= 1");
          } else {
            if (l.width < 1) throw std::invalid_argument("border_band width must be >= 1");
          }
        },
        layer);
  }
  if (rescale.radii_pool.empty()) throw std::invalid_argument("rescale radii pool is empty");
  if (!std::is_sorted(rescale.radii_pool.begin(), rescale.radii_pool.end()))
    throw std::invalid_argument("rescale radii pool must be ascending");
  for (int r : rescale.radii_pool)
    if (r < 1) throw std::invalid_argument("rescale radii must be >= 1");
  if (rescale.epsilon < 0.0) throw std::invalid_argument("rescale epsilon must be >= 0");
  if (high_freq.amplitude < 0.0) throw std::invalid_argument("high_freq amplitude must be >= 0");
  check_prob(high_freq.probability, "high_freq probability");
  if (!(hole_threshold > 0.0 && hole_threshold <= 1.0))
    throw std::invalid_argument("hole_threshold must be in (0, 1]");
}

// ---------------------------------------------------------------------------
// field import/export

namespace {

constexpr char kDfgMagic[4] = {'D', 'F', 'G', '1'};

bool has_dfg_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, kDfgMagic, 4) == 0;
}

ScalarField read_dfg(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field file: " + path);
  char magic[4];
  std::uint32_t w = 0, h = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || std::memcmp(magic, kDfgMagic, 4) != 0)
    throw std::runtime_error(path + ": not a DFG1 float grid");
  if (w < 1 || h < 1 || w > (1u << 20) || h > (1u << 20))
    throw std::runtime_error(path + ": implausible DFG1 dimensions");
  std::vector<float> buf(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!in) throw std::runtime_error(path + ": truncated DFG1 payload");
  ScalarField f(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (!std::isfinite(buf[i])) throw std::runtime_error(path + ": non-finite DFG1 value");
    f.values[i] = buf[i];
  }
  return f;
}

}  // namespace

ScalarField import_scalar_field(const std::string& path, double png_scale) {
  if (has_dfg_magic(path)) return read_dfg(path);
  if (!(png_scale > 0.0)) throw std::invalid_argument("import_scalar_field: png_scale must be > 0");
  const GrayImage16 img = load_gray16(path);
  ScalarField f(img.width, img.height, 0.0, false);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] != 0) {
      f.values[i] = static_cast<double>(img.pixels[i]) / png_scale;
      f.valid[i] = 1;
    }
  }
  return f;
}

void export_scalar_field_dfg(const ScalarField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open field file for writing: " + path);
  const std::uint32_t w = static_cast<std::uint32_t>(field.width);
  const std::uint32_t h = static_cast<std::uint32_t>(field.height);
  out.write(kDfgMagic, 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  for (double v : field.values) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
  if (!out) throw std::runtime_error("write failure: " + path);
}

HoleProbField import_prob_field(const std::string& path) {
  if (has_dfg_magic(path)) {
    const ScalarField f = read_dfg(path);
    HoleProbField p(f.width, f.height);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      if (!(f.values[i] >= 0.0 && f.values[i] <= 1.0))
        throw std::runtime_error(path + ": probability " + std::to_string(f.values[i]) +
                                 " out of [0, 1]");
      p.prob[i] = f.values[i];
    }
    return p;
  }
  const GrayImage16 img = load_gray16(path);
  HoleProbField p(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    p.prob[i] = static_cast<double>(img.pixels[i]) / 65535.0;
  return p;
}

void export_prob_field_png(const HoleProbField& field, const std::string& path) {
  GrayImage16 img;
  img.width = field.width;
  img.height = field.height;
  img.pixels.resize(field.prob.size());
  for (std::size_t i = 0; i < field.prob.size(); ++i)
    img.pixels[i] = static_cast<std::uint16_t>(std::floor(field.prob[i] * 65535.0 + 0.5));
  save_gray16(img, path);
}

// ---------------------------------------------------------------------------
// nearest-valid filling

namespace {

// Exact Euclidean nearest donor with ties resolved to the smallest row-major
// donor index. Ring search per hole, brute force when donors are very sparse.
void fill_nearest_impl(int w, int h, std::vector<double>& values,
                       std::vector<std::uint8_t>& valid) {
  const std::size_t n = values.size();
  std::vector<std::size_t> donors;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i]) donors.push_back(i);
  if (donors.empty()) throw std::runtime_error("fill_holes_nearest: no valid pixels");
  if (donors.size() == n) return;

  std::vector<double> out_values = values;
  const bool sparse = donors.size() <= 256;

  auto better = [](std::int64_t d2a, std::size_t ia, std::int64_t d2b, std::size_t ib) {
    return d2a < d2b || (d2a == d2b && ia < ib);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (valid[i]) continue;

      std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
      std::size_t best_i = n;

      if (sparse) {
        for (std::size_t di : donors) {
          const std::int64_t dx = static_cast<std::int64_t>(di % w) - x;
          const std::int64_t dy = static_cast<std::int64_t>(di / w) - y;
          const std::int64_t d2 = dx * dx + dy * dy;
          if (better(d2, di, best_d2, best_i)) {
            best_d2 = d2;
            best_i = di;
          }
        }
      } else {
        auto consider = [&](int cx, int cy) {
          if (cx < 0 || cy < 0 || cx >= w || cy >= h) return;
          const std::size_t ci = static_cast<std::size_t>(cy) * w + cx;
          if (!valid[ci]) return;
          const std::int64_t dx = cx - x, dy = cy - y;
          const std::int64_t d2 = dx * dx + dy * dy;
          if (better(d2, ci, best_d2, best_i)) {
            best_d2 = d2;
            best_i = ci;
          }
        };
        const int max_ring = std::max(w, h);
        for (int r = 0;; ++r) {
          // Stop once no farther ring can hold an equal-or-closer donor.
          if (best_i != n && static_cast<std::int64_t>(r) * r > best_d2) break;
          if (r > max_ring) break;
          if (r == 0) {
            consider(x, y);
            continue;
          }
          for (int cx = x - r; cx <= x + r; ++cx) {
            consider(cx, y - r);
            consider(cx, y + r);
          }
          for (int cy = y - r + 1; cy <= y + r - 1; ++cy) {
            consider(x - r, cy);
            consider(x + r, cy);
          }
        }
      }
      out_values[i] = values[best_i];
    }
  }
  values = std::move(out_values);
  std::fill(valid.begin(), valid.end(), 1);
}

}  // namespace

DepthMap fill_holes_nearest(const DepthMap& d) {
  DepthMap out = d;
  fill_nearest_impl(out.width, out.height, out.values, out.valid);
  return out;
}

ScalarField fill_holes_nearest(const ScalarField& f) {
  ScalarField out = f;
  fill_nearest_impl(out.width, out.height, out.values, out.valid);
  return out;
}

// ---------------------------------------------------------------------------
// hole layers

namespace {

// Coarse random grid (cell size `grid` px) bilinearly upsampled to the image.
// Node values come from `draw`, row-major, so the stream is scheduling-free.
std::vector<double> smooth_random_field(int w, int h, int grid, Rng& rng,
                                        double (*draw)(Rng&)) {
  const int nx = (w - 1) / grid + 2;
  const int ny = (h - 1) / grid + 2;
  std::vector<double> nodes(static_cast<std::size_t>(nx) * ny);
  for (auto& v : nodes) v = draw(rng);

  std::vector<double> field(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const double gy = static_cast<double>(y) / grid;
    const int iy = std::min(static_cast<int>(gy), ny - 2);
    const double fy = gy - iy;
    for (int x = 0; x < w; ++x) {
      const double gx = static_cast<double>(x) / grid;
      const int ix = std::min(static_cast<int>(gx), nx - 2);
      const double fx = gx - ix;
      const double v00 = nodes[static_cast<std::size_t>(iy) * nx + ix];
      const double v10 = nodes[static_cast<std::size_t>(iy) * nx + ix + 1];
      const double v01 = nodes[static_cast<std::size_t>(iy + 1) * nx + ix];
      const double v11 = nodes[static_cast<std::size_t>(iy + 1) * nx + ix + 1];
      field[static_cast<std::size_t>(y) * w + x] =
          (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
    }
  }
  return field;
}

double draw_normal(Rng& rng) { return rng.normal(); }

// Central-difference gradient magnitude of a dense field, borders replicated.
std::vector<double> gradient_magnitude(const ScalarField& f) {
  const int w = f.width, h = f.height;
  std::vector<double> mag(f.size());
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
      const double gx = 0.5 * (f.at(xp, y) - f.at(xm, y));
      const double gy = 0.5 * (f.at(x, yp) - f.at(x, ym));
      mag[f.idx(x, y)] = std::hypot(gx, gy);
    }
  }
  return mag;
}

std::vector<std::uint8_t> dilate_box(const std::vector<std::uint8_t>& mask, int w, int h,
                                     int radius) {
  if (radius <= 0) return mask;
  std::vector<std::uint8_t> out(mask.size(), 0);
  // Two-pass separable dilation.
  std::vector<std::uint8_t> tmp(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      std::uint8_t v = 0;
      for (int cx = x0; cx <= x1 && !v; ++cx) v = mask[static_cast<std::size_t>(y) * w + cx];
      tmp[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      std::uint8_t v = 0;
      for (int cy = y0; cy <= y1 && !v; ++cy) v = tmp[static_cast<std::size_t>(cy) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  return out;
}

}  // namespace

HoleProbField gen_hole_map(const ImageRGB& rgb, const DepthMap& gt,
                           const std::vector<HoleLayer>& layers, Rng& rng) {
  if (rgb.width != gt.width || rgb.height != gt.height)
    throw std::invalid_argument("gen_hole_map: rgb/gt dimension mismatch");
  const int w = gt.width, h = gt.height;
  const std::size_t n = gt.size();

  // Survival product: H = 1 - prod_j (1 - h_j).
  std::vector<double> survive(n, 1.0);
  auto apply_prob = [&](const std::vector<double>& layer_prob) {
    for (std::size_t i = 0; i < n; ++i) survive[i] *= 1.0 - layer_prob[i];
  };

  for (const auto& layer : layers) {
    std::vector<double> p(n, 0.0);
    if (const auto* edge = std::get_if<EdgeHoleLayer>(&layer)) {
      const ScalarField disp = to_disparity(fill_holes_nearest(gt));
      const std::vector<double> mag = gradient_magnitude(disp);
      std::vector<std::uint8_t> mask(n, 0);
      for (std::size_t i = 0; i < n; ++i) mask[i] = mag[i] > edge->grad_threshold;
      mask = dilate_box(mask, w, h, edge->dilate_radius);
      for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) p[i] = edge->prob;
    } else if (const auto* dark = std::get_if<DarkHoleLayer>(&layer)) {
      const ScalarField lum = luminance(rgb);
      for (std::size_t i = 0; i < n; ++i)
        if (lum.values[i] < dark->lum_threshold) p[i] = dark->prob;
    } else if (const auto* speck = std::get_if<SpeckleHoleLayer>(&layer)) {
      const std::vector<double> field = smooth_random_field(w, h, speck->grid, rng, draw_normal);
      for (std::size_t i = 0; i < n; ++i)
        if (field[i] > speck->threshold) p[i] = speck->prob;
    } else if (const auto* band = std::get_if<BorderBandLayer>(&layer)) {
      const int bw = std::min(band->width, band->side == BandSide::left || band->side == BandSide::right ? w : h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const bool hit = (band->side == BandSide::left && x < bw) ||
                           (band->side == BandSide::right && x >= w - bw) ||
                           (band->side == BandSide::top && y < bw) ||
                           (band->side == BandSide::bottom && y >= h - bw);
          if (hit) p[static_cast<std::size_t>(y) * w + x] = 1.0;
        }
      }
    }
    apply_prob(p);
  }

  HoleProbField out(w, h);
  for (std::size_t i = 0; i < n; ++i) out.prob[i] = 1.0 - survive[i];
  return out;
}

// ---------------------------------------------------------------------------
// value-noise stages

namespace {

void apply_quantization(ScalarField& disp, const QuantizationStage& s) {
  const double fb = s.virtual_focal * s.virtual_baseline;
  for (std::size_t i = 0; i < disp.values.size(); ++i) {
    if (!disp.valid[i]) continue;
    const double d_px = fb * disp.values[i];
    const double q = std::round(d_px / s.subpixel_step) * s.subpixel_step;
    disp.values[i] = std::max(q / fb, kDisparityFloor);
  }
}

void apply_depth_gaussian(ScalarField& disp, const DepthGaussianStage& s, Rng& rng,
                          double d_floor) {
  for (std::size_t i = 0; i < disp.values.size(); ++i) {
    if (!disp.valid[i]) continue;
    const double z = 1.0 / disp.values[i];
    const double sigma = s.sigma0 + s.sigma1 * z * z;
    const double zp = std::max(z + rng.normal() * sigma, d_floor);
    disp.values[i] = 1.0 / zp;
  }
}

void apply_lateral_warp(ScalarField& disp, const LateralWarpStage& s, Rng& rng) {
  const int w = disp.width, h = disp.height;
  // Interleaved dx/dy node draws over one shared coarse grid.
  const int grid = s.grid;
  const int nx = (w - 1) / grid + 2;
  const int ny = (h - 1) / grid + 2;
  std::vector<double> node_dx(static_cast<std::size_t>(nx) * ny);
  std::vector<double> node_dy(node_dx.size());
  for (std::size_t i = 0; i < node_dx.size(); ++i) {
    node_dx[i] = rng.uniform(-s.amplitude, s.amplitude);
    node_dy[i] = rng.uniform(-s.amplitude, s.amplitude);
  }

  auto bilerp_nodes = [&](const std::vector<double>& nodes, double px, double py) {
    const double gx = px / grid, gy = py / grid;
    const int ix = std::min(static_cast<int>(gx), nx - 2);
    const int iy = std::min(static_cast<int>(gy), ny - 2);
    const double fx = gx - ix, fy = gy - iy;
    const double v00 = nodes[static_cast<std::size_t>(iy) * nx + ix];
    const double v10 = nodes[static_cast<std::size_t>(iy) * nx + ix + 1];
    const double v01 = nodes[static_cast<std::size_t>(iy + 1) * nx + ix];
    const double v11 = nodes[static_cast<std::size_t>(iy + 1) * nx + ix + 1];
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
  };

  const std::vector<double> src = disp.values;
  auto sample = [&](double px, double py) {
    px = std::clamp(px, 0.0, static_cast<double>(w - 1));
    py = std::clamp(py, 0.0, static_cast<double>(h - 1));
    const int ix = std::min(static_cast<int>(px), w - 2 >= 0 ? w - 2 : 0);
    const int iy = std::min(static_cast<int>(py), h - 2 >= 0 ? h - 2 : 0);
    const double fx = px - ix, fy = py - iy;
    const int ixp = std::min(ix + 1, w - 1), iyp = std::min(iy + 1, h - 1);
    const double v00 = src[static_cast<std::size_t>(iy) * w + ix];
    const double v10 = src[static_cast<std::size_t>(iy) * w + ixp];
    const double v01 = src[static_cast<std::size_t>(iyp) * w + ix];
    const double v11 = src[static_cast<std::size_t>(iyp) * w + ixp];
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!disp.valid[i]) continue;
      const double dx = bilerp_nodes(node_dx, x, y);
      const double dy = bilerp_nodes(node_dy, x, y);
      disp.values[i] = std::max(sample(x + dx, y + dy), kDisparityFloor);
    }
  }
}

}  // namespace

ScalarField gen_value_noise(const ImageRGB& rgb, const DepthMap& gt,
                            const std::vector<ValueStage>& stages, Rng& rng, double d_floor) {
  if (rgb.width != gt.width || rgb.height != gt.height)
    throw std::invalid_argument("gen_value_noise: rgb/gt dimension mismatch");
  if (gt.count_valid() == 0) throw std::runtime_error("gen_value_noise: gt has no valid pixels");

  ScalarField disp = to_disparity(fill_holes_nearest(gt), d_floor);
  for (const auto& stage : stages) {
    if (const auto* q = std::get_if<QuantizationStage>(&stage)) {
      apply_quantization(disp, *q);
    } else if (const auto* g = std::get_if<DepthGaussianStage>(&stage)) {
      apply_depth_gaussian(disp, *g, rng, d_floor);
    } else if (const auto* lw = std::get_if<LateralWarpStage>(&stage)) {
      apply_lateral_warp(disp, *lw, rng);
    }
  }

  // Re-mask to the ground-truth validity.
  for (std::size_t i = 0; i < disp.values.size(); ++i) {
    if (!gt.valid[i]) {
      disp.values[i] = 0.0;
      disp.valid[i] = 0;
    }
  }
  return disp;
}

ScalarField add_high_freq_noise(const ScalarField& field, double amplitude, double probability,
                                Rng& rng) {
  if (amplitude < 0.0) throw std::invalid_argument("add_high_freq_noise: amplitude must be >= 0");
  check_prob(probability, "add_high_freq_noise probability");

  ScalarField out = field;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!out.valid[i]) continue;
    if (rng.uniform() < probability)
      out.values[i] *= 1.0 + rng.uniform(-amplitude, amplitude);
  }
  return out;
}

DepthMap compose_camera_depth(const ScalarField& value_field, const HoleProbField& hole,
                              double threshold) {
  if (value_field.width != hole.width || value_field.height != hole.height)
    throw std::invalid_argument("compose_camera_depth: dimension mismatch");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("compose_camera_depth: threshold must be in (0, 1]");

  DepthMap out(value_field.width, value_field.height);
  for (std::size_t i = 0; i < value_field.values.size(); ++i) {
    // Strict '<' keeps the boundary probability a hole.
    if (hole.prob[i] < threshold && value_field.valid[i]) {
      out.values[i] = 1.0 / std::max(value_field.values[i], kDisparityFloor);
      out.valid[i] = 1;
    }
  }
  return out;
}

SynthesisResult synthesize(const ImageRGB& rgb, const DepthMap& gt, const NoisePipelineConfig& cfg,
                           std::uint64_t sample_index) {
  cfg.check();

  Rng rng_value = derive_rng(cfg.seed, sample_index, "value");
  ScalarField field = gen_value_noise(rgb, gt, cfg.value_stages, rng_value);

  Rng rng_rescale = derive_rng(cfg.seed, sample_index, cfg.rescale.seed_tag);
  RescaleResult rescaled = guided_rescale_augment(field, gt, cfg.rescale, rng_rescale);

  Rng rng_hf = derive_rng(cfg.seed, sample_index, "highfreq");
  field = add_high_freq_noise(rescaled.field, cfg.high_freq.amplitude, cfg.high_freq.probability,
                              rng_hf);

  // Densify so the hole set is exactly the thresholded hole map.
  field = fill_holes_nearest(field);

  Rng rng_hole = derive_rng(cfg.seed, sample_index, "hole");
  const HoleProbField holes = gen_hole_map(rgb, gt, cfg.hole_layers, rng_hole);

  SynthesisResult res;
  res.rescale_radius = rescaled.radius;
  res.depth = compose_camera_depth(field, holes, cfg.hole_threshold);
  return res;
}

}  // namespace camdepth
