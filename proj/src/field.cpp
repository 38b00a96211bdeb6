#include "camdepth/field.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace camdepth {

void Intrinsics::check() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("Intrinsics: fx, fy must be > 0");
  if (!(depth_scale > 0.0)) throw std::invalid_argument("Intrinsics: depth_scale must be > 0");
  if (width < 1 || height < 1) throw std::invalid_argument("Intrinsics: dimensions must be >= 1");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw std::invalid_argument("Intrinsics: principal point outside image");
}

ScalarField luminance(const ImageRGB& img) {
  ScalarField out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto i = img.idx(x, y);
      out.values[out.idx(x, y)] =
          0.299 * img.data[i] + 0.587 * img.data[i + 1] + 0.114 * img.data[i + 2];
    }
  }
  return out;
}

Intrinsics intrinsics_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  Intrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  k.depth_scale = j.value("depth_scale", 1000.0);
  k.check();
  return k;
}

Intrinsics load_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open intrinsics file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return intrinsics_from_json(ss.str());
}

std::string intrinsics_to_json(const Intrinsics& k) {
  nlohmann::json j{{"fx", k.fx},       {"fy", k.fy},         {"cx", k.cx},
                   {"cy", k.cy},       {"width", k.width},   {"height", k.height},
                   {"depth_scale", k.depth_scale}};
  return j.dump(2);
}

}  // namespace camdepth
