#pragma once

#include <string>

#include "camdepth/field.hpp"

namespace camdepth {

// 16-bit single-channel PNG codec for depth. Stored integer u maps to
// u / depth_scale meters; u = 0 is a hole.
DepthMap load_depth(const std::string& path, double depth_scale);

// Writes round(value * depth_scale) per pixel, round-half-up; holes write 0.
// Throws if any rounded value exceeds 65535.
void save_depth(const DepthMap& map, const std::string& path, double depth_scale);

// 8-bit 3-channel PNG.
ImageRGB load_rgb(const std::string& path);
void save_rgb(const ImageRGB& img, const std::string& path);

// Raw 16-bit grayscale PNG access used by field import/export.
struct GrayImage16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};
GrayImage16 load_gray16(const std::string& path);
void save_gray16(const GrayImage16& img, const std::string& path);

}  // namespace camdepth
