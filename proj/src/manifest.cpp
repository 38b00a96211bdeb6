#include "camdepth/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace camdepth {

std::string DatasetManifest::resolve(const std::string& rel_path) const {
  fs::path p(rel_path);
  if (p.is_absolute()) return rel_path;
  return (fs::path(base_dir) / p).string();
}

const Intrinsics& DatasetManifest::intrinsics_for(const SampleRecord& rec) const {
  auto it = intrinsics.find(rec.intrinsics_ref);
  if (it == intrinsics.end())
    throw std::runtime_error("sample '" + rec.id + "' references unknown intrinsics '" +
                             rec.intrinsics_ref + "'");
  return it->second;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void parse_fail(int line_no, const std::string& msg) {
  throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + msg);
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(line_no, "expected a number, got '" + s + "'");
  }
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);

  DatasetManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  if (m.base_dir.empty()) m.base_dir = ".";

  enum class Block { none, intrinsics, sample };
  Block block = Block::none;
  std::string block_name;
  Intrinsics cur_k;
  SampleRecord cur_s;
  std::set<std::string> seen_ids;

  std::string line;
  int line_no = 0;
  auto close_block = [&](int at_line) {
    if (block == Block::intrinsics) {
      cur_k.check();
      m.intrinsics[block_name] = cur_k;
    } else if (block == Block::sample) {
      if (cur_s.rgb_path.empty()) parse_fail(at_line, "sample '" + cur_s.id + "' missing rgb");
      if (cur_s.gt_depth_path.empty()) parse_fail(at_line, "sample '" + cur_s.id + "' missing gt");
      if (cur_s.intrinsics_ref.empty())
        parse_fail(at_line, "sample '" + cur_s.id + "' missing intrinsics");
      m.samples.push_back(cur_s);
    }
    block = Block::none;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];

    if (block == Block::none) {
      if (key == "version") {
        if (toks.size() != 2 || toks[1] != "1") parse_fail(line_no, "unsupported version");
      } else if (key == "meta") {
        if (toks.size() < 3) parse_fail(line_no, "meta needs a key and a value");
        std::string val = toks[2];
        for (std::size_t i = 3; i < toks.size(); ++i) val += " " + toks[i];
        m.metadata[toks[1]] = val;
      } else if (key == "intrinsics") {
        if (toks.size() != 2) parse_fail(line_no, "intrinsics needs a name");
        block = Block::intrinsics;
        block_name = toks[1];
        cur_k = Intrinsics{};
      } else if (key == "sample") {
        if (toks.size() != 2) parse_fail(line_no, "sample needs an id");
        if (!seen_ids.insert(toks[1]).second)
          parse_fail(line_no, "duplicate sample id '" + toks[1] + "'");
        block = Block::sample;
        cur_s = SampleRecord{};
        cur_s.id = toks[1];
      } else {
        parse_fail(line_no, "unknown directive '" + key + "'");
      }
      continue;
    }

    if (key == "end") {
      close_block(line_no);
      continue;
    }

    if (block == Block::intrinsics) {
      if (toks.size() != 2) parse_fail(line_no, "intrinsics entries are 'key value'");
      const double v = to_double(toks[1], line_no);
      if (key == "fx") cur_k.fx = v;
      else if (key == "fy") cur_k.fy = v;
      else if (key == "cx") cur_k.cx = v;
      else if (key == "cy") cur_k.cy = v;
      else if (key == "width") cur_k.width = static_cast<int>(v);
      else if (key == "height") cur_k.height = static_cast<int>(v);
      else if (key == "depth_scale") cur_k.depth_scale = v;
      else parse_fail(line_no, "unknown intrinsics key '" + key + "'");
    } else {
      if (toks.size() != 2) parse_fail(line_no, "sample entries are 'key value'");
      if (key == "rgb") cur_s.rgb_path = toks[1];
      else if (key == "gt") cur_s.gt_depth_path = toks[1];
      else if (key == "camera") cur_s.camera_depth_path = toks[1];
      else if (key == "pred") cur_s.pred_depth_path = toks[1];
      else if (key == "intrinsics") cur_s.intrinsics_ref = toks[1];
      else parse_fail(line_no, "unknown sample key '" + key + "'");
    }
  }
  if (block != Block::none) parse_fail(line_no, "unterminated block (missing 'end')");
  return m;
}

std::vector<ManifestIssue> validate_manifest(const DatasetManifest& m) {
  std::vector<ManifestIssue> issues;
  auto check_file = [&](const std::string& id, const std::string& rel, const char* what) {
    if (!fs::exists(m.resolve(rel)))
      issues.push_back({id, std::string(what) + " file missing: " + rel});
  };
  for (const auto& s : m.samples) {
    if (m.intrinsics.find(s.intrinsics_ref) == m.intrinsics.end())
      issues.push_back({s.id, "unknown intrinsics '" + s.intrinsics_ref + "'"});
    check_file(s.id, s.rgb_path, "rgb");
    check_file(s.id, s.gt_depth_path, "gt depth");
    if (s.camera_depth_path) check_file(s.id, *s.camera_depth_path, "camera depth");
    if (s.pred_depth_path) check_file(s.id, *s.pred_depth_path, "pred depth");
  }
  return issues;
}

}  // namespace camdepth
