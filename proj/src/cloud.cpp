#include "camdepth/cloud.hpp"

#include <fstream>

namespace camdepth {

PointCloud backproject(const DepthMap& d, const Intrinsics& k, const ImageRGB* rgb) {
  k.check();
  if (d.width != k.width || d.height != k.height)
    throw std::invalid_argument("backproject: depth does not match intrinsics dimensions");
  if (rgb && (rgb->width != d.width || rgb->height != d.height))
    throw std::invalid_argument("backproject: rgb does not match depth dimensions");

  PointCloud cloud;
  cloud.points.reserve(d.count_valid());
  if (rgb) cloud.colors.reserve(cloud.points.capacity());

  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const std::size_t i = d.idx(u, v);
      if (!d.valid[i]) continue;
      const double z = d.values[i];
      cloud.points.push_back({(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z});
      if (rgb) {
        const auto c = rgb->idx(u, v);
        cloud.colors.push_back({rgb->data[c], rgb->data[c + 1], rgb->data[c + 2]});
      }
    }
  }
  return cloud;
}

std::vector<PixelPoint> project(const PointCloud& p, const Intrinsics& k) {
  k.check();
  std::vector<PixelPoint> out;
  out.reserve(p.points.size());
  for (const auto& pt : p.points) {
    if (!(pt[2] > 0.0)) throw std::invalid_argument("project: non-positive z");
    out.push_back({k.fx * pt[0] / pt[2] + k.cx, k.fy * pt[1] / pt[2] + k.cy, pt[2]});
  }
  return out;
}

void write_ply(const PointCloud& p, const std::string& path, PlyMode mode) {
  if (p.has_colors() && p.colors.size() != p.points.size())
    throw std::invalid_argument("write_ply: color count does not match point count");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open PLY for writing: " + path);

  out << "ply\n";
  out << (mode == PlyMode::ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
  out << "element vertex " << p.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (p.has_colors()) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";

  if (mode == PlyMode::ascii) {
    out.precision(9);
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      const float x = static_cast<float>(p.points[i][0]);
      const float y = static_cast<float>(p.points[i][1]);
      const float z = static_cast<float>(p.points[i][2]);
      out << x << " " << y << " " << z;
      if (p.has_colors())
        out << " " << int(p.colors[i][0]) << " " << int(p.colors[i][1]) << " "
            << int(p.colors[i][2]);
      out << "\n";
    }
  } else {
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      const float xyz[3] = {static_cast<float>(p.points[i][0]), static_cast<float>(p.points[i][1]),
                            static_cast<float>(p.points[i][2])};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (p.has_colors())
        out.write(reinterpret_cast<const char*>(p.colors[i].data()), 3);
    }
  }
  if (!out) throw std::runtime_error("write failure: " + path);
}

}  // namespace camdepth
