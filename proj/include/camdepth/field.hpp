#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace camdepth {

// Dense per-pixel real field with a validity mask. Invalid entries store 0.0
// and must never feed downstream math unmasked.
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  ScalarField() = default;
  ScalarField(int w, int h, double fill = 0.0, bool all_valid = true)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * h, all_valid ? fill : 0.0),
        valid(static_cast<std::size_t>(w) * h, all_valid ? 1 : 0) {
    if (w < 1 || h < 1) throw std::invalid_argument("ScalarField: dimensions must be >= 1");
  }

  std::size_t size() const { return values.size(); }
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

  double at(int x, int y) const { return values[idx(x, y)]; }
  bool is_valid(int x, int y) const { return valid[idx(x, y)] != 0; }

  void set(int x, int y, double v) {
    values[idx(x, y)] = v;
    valid[idx(x, y)] = 1;
  }
  void set_invalid(int x, int y) {
    values[idx(x, y)] = 0.0;
    valid[idx(x, y)] = 0;
  }

  std::size_t count_valid() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }
};

// Metric depth in meters. Holes are stored as exactly 0 with valid = false;
// valid pixels are strictly positive and finite.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {
    if (w < 1 || h < 1) throw std::invalid_argument("DepthMap: dimensions must be >= 1");
  }

  std::size_t size() const { return values.size(); }
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

  double at(int x, int y) const { return values[idx(x, y)]; }
  bool is_valid(int x, int y) const { return valid[idx(x, y)] != 0; }

  void set(int x, int y, double meters) {
    if (!(meters > 0.0) || !std::isfinite(meters))
      throw std::invalid_argument("DepthMap::set: depth must be finite and > 0");
    values[idx(x, y)] = meters;
    valid[idx(x, y)] = 1;
  }
  void set_hole(int x, int y) {
    values[idx(x, y)] = 0.0;
    valid[idx(x, y)] = 0;
  }

  std::size_t count_valid() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }
};

// 8-bit interleaved RGB image aligned to the depth grid.
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // r,g,b interleaved, row-major

  ImageRGB() = default;
  ImageRGB(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3) {
    if (w < 1 || h < 1) throw std::invalid_argument("ImageRGB: dimensions must be >= 1");
    for (std::size_t i = 0; i < data.size(); i += 3) {
      data[i] = r;
      data[i + 1] = g;
      data[i + 2] = b;
    }
  }

  std::size_t idx(int x, int y) const { return (static_cast<std::size_t>(y) * width + x) * 3; }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const auto i = idx(x, y);
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
};

// Pinhole camera with the stored-depth scale (integer units per meter).
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  double depth_scale = 1000.0;

  void check() const;
};

// BT.601 luma of an RGB image, range [0, 255], everywhere valid.
ScalarField luminance(const ImageRGB& img);

// Intrinsics as a standalone JSON object {fx, fy, cx, cy, width, height, depth_scale}.
Intrinsics intrinsics_from_json(const std::string& json_text);
Intrinsics load_intrinsics(const std::string& path);
std::string intrinsics_to_json(const Intrinsics& k);

}  // namespace camdepth
