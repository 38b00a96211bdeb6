#include "camdepth/config.hpp"

#include <fstream>
#include <sstream>

namespace camdepth {

namespace {

[[noreturn]] void fail(int line_no, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line_no) + ": " + msg);
}

double num(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(line_no, "expected a number, got '" + s + "'");
  }
}

std::uint64_t unum(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(line_no, "expected an unsigned integer, got '" + s + "'");
  }
}

BandSide parse_side(const std::string& s, int line_no) {
  if (s == "left") return BandSide::left;
  if (s == "right") return BandSide::right;
  if (s == "top") return BandSide::top;
  if (s == "bottom") return BandSide::bottom;
  fail(line_no, "unknown band side '" + s + "'");
}

struct Section {
  enum class Kind { none, quantization, depth_gaussian, lateral_warp, rescale, high_freq,
                    edge, dark, speckle, border_band } kind = Kind::none;
  std::size_t index = 0;  // stage/layer index in the config being built
};

}  // namespace

NoisePipelineConfig parse_pipeline_config(const std::string& text) {
  NoisePipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Section sec;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;

    if (toks[0].front() == '[') {
      std::string joined = toks[0];
      for (std::size_t i = 1; i < toks.size(); ++i) joined += " " + toks[i];
      if (joined.back() != ']') fail(line_no, "unterminated section header");
      const std::string name = joined.substr(1, joined.size() - 2);
      if (name == "value quantization") {
        cfg.value_stages.emplace_back(QuantizationStage{});
        sec = {Section::Kind::quantization, cfg.value_stages.size() - 1};
      } else if (name == "value depth_gaussian") {
        cfg.value_stages.emplace_back(DepthGaussianStage{});
        sec = {Section::Kind::depth_gaussian, cfg.value_stages.size() - 1};
      } else if (name == "value lateral_warp") {
        cfg.value_stages.emplace_back(LateralWarpStage{});
        sec = {Section::Kind::lateral_warp, cfg.value_stages.size() - 1};
      } else if (name == "rescale") {
        sec = {Section::Kind::rescale, 0};
      } else if (name == "high_freq") {
        sec = {Section::Kind::high_freq, 0};
      } else if (name == "hole edge") {
        cfg.hole_layers.emplace_back(EdgeHoleLayer{});
        sec = {Section::Kind::edge, cfg.hole_layers.size() - 1};
      } else if (name == "hole dark") {
        cfg.hole_layers.emplace_back(DarkHoleLayer{});
        sec = {Section::Kind::dark, cfg.hole_layers.size() - 1};
      } else if (name == "hole speckle") {
        cfg.hole_layers.emplace_back(SpeckleHoleLayer{});
        sec = {Section::Kind::speckle, cfg.hole_layers.size() - 1};
      } else if (name == "hole border_band") {
        cfg.hole_layers.emplace_back(BorderBandLayer{});
        sec = {Section::Kind::border_band, cfg.hole_layers.size() - 1};
      } else {
        fail(line_no, "unknown section '" + name + "'");
      }
      continue;
    }

    const std::string& key = toks[0];
    if (sec.kind == Section::Kind::none) {
      if (key == "seed" && toks.size() == 2) cfg.seed = unum(toks[1], line_no);
      else if (key == "hole_threshold" && toks.size() == 2)
        cfg.hole_threshold = num(toks[1], line_no);
      else fail(line_no, "unknown top-level key '" + key + "'");
      continue;
    }

    auto one = [&]() -> double {
      if (toks.size() != 2) fail(line_no, "'" + key + "' takes one value");
      return num(toks[1], line_no);
    };

    switch (sec.kind) {
      case Section::Kind::quantization: {
        auto& s = std::get<QuantizationStage>(cfg.value_stages[sec.index]);
        if (key == "virtual_focal") s.virtual_focal = one();
        else if (key == "virtual_baseline") s.virtual_baseline = one();
        else if (key == "subpixel_step") s.subpixel_step = one();
        else fail(line_no, "unknown quantization key '" + key + "'");
        break;
      }
      case Section::Kind::depth_gaussian: {
        auto& s = std::get<DepthGaussianStage>(cfg.value_stages[sec.index]);
        if (key == "sigma0") s.sigma0 = one();
        else if (key == "sigma1") s.sigma1 = one();
        else fail(line_no, "unknown depth_gaussian key '" + key + "'");
        break;
      }
      case Section::Kind::lateral_warp: {
        auto& s = std::get<LateralWarpStage>(cfg.value_stages[sec.index]);
        if (key == "amplitude") s.amplitude = one();
        else if (key == "grid") s.grid = static_cast<int>(one());
        else fail(line_no, "unknown lateral_warp key '" + key + "'");
        break;
      }
      case Section::Kind::rescale: {
        if (key == "radii") {
          if (toks.size() < 2) fail(line_no, "'radii' needs at least one value");
          cfg.rescale.radii_pool.clear();
          for (std::size_t i = 1; i < toks.size(); ++i)
            cfg.rescale.radii_pool.push_back(static_cast<int>(num(toks[i], line_no)));
        } else if (key == "epsilon") {
          cfg.rescale.epsilon = one();
        } else {
          fail(line_no, "unknown rescale key '" + key + "'");
        }
        break;
      }
      case Section::Kind::high_freq: {
        if (key == "amplitude") cfg.high_freq.amplitude = one();
        else if (key == "probability") cfg.high_freq.probability = one();
        else fail(line_no, "unknown high_freq key '" + key + "'");
        break;
      }
      case Section::Kind::edge: {
        auto& l = std::get<EdgeHoleLayer>(cfg.hole_layers[sec.index]);
        if (key == "grad_threshold") l.grad_threshold = one();
        else if (key == "dilate_radius") l.dilate_radius = static_cast<int>(one());
        else if (key == "prob") l.prob = one();
        else fail(line_no, "unknown edge key '" + key + "'");
        break;
      }
      case Section::Kind::dark: {
        auto& l = std::get<DarkHoleLayer>(cfg.hole_layers[sec.index]);
        if (key == "lum_threshold") l.lum_threshold = one();
        else if (key == "prob") l.prob = one();
        else fail(line_no, "unknown dark key '" + key + "'");
        break;
      }
      case Section::Kind::speckle: {
        auto& l = std::get<SpeckleHoleLayer>(cfg.hole_layers[sec.index]);
        if (key == "grid") l.grid = static_cast<int>(one());
        else if (key == "threshold") l.threshold = one();
        else if (key == "prob") l.prob = one();
        else fail(line_no, "unknown speckle key '" + key + "'");
        break;
      }
      case Section::Kind::border_band: {
        auto& l = std::get<BorderBandLayer>(cfg.hole_layers[sec.index]);
        if (key == "side") {
          if (toks.size() != 2) fail(line_no, "'side' takes one value");
          l.side = parse_side(toks[1], line_no);
        } else if (key == "width") {
          l.width = static_cast<int>(one());
        } else {
          fail(line_no, "unknown border_band key '" + key + "'");
        }
        break;
      }
      case Section::Kind::none:
        break;
    }
  }

  cfg.check();
  return cfg;
}

NoisePipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str());
}

}  // namespace camdepth
