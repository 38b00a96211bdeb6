#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "camdepth/field.hpp"

namespace camdepth {

// Camera-frame points: +z forward, +x right, +y down. Pixel (u, v) is the
// pixel center at integer coordinates.
struct PointCloud {
  std::vector<std::array<double, 3>> points;
  std::vector<std::array<std::uint8_t, 3>> colors;  // empty or one per point

  bool has_colors() const { return !colors.empty(); }
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

// One point per valid depth pixel, row-major order; colors copied when rgb given.
PointCloud backproject(const DepthMap& d, const Intrinsics& k, const ImageRGB* rgb = nullptr);

// Pinhole projection; throws on non-positive z.
std::vector<PixelPoint> project(const PointCloud& p, const Intrinsics& k);

enum class PlyMode { ascii, binary_little_endian };

// PLY 1.0 with element vertex {float x,y,z [, uchar red,green,blue]}.
void write_ply(const PointCloud& p, const std::string& path, PlyMode mode);

}  // namespace camdepth
