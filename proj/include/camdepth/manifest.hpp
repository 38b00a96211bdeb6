#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camdepth/field.hpp"

namespace camdepth {

struct SampleRecord {
  std::string id;
  std::string rgb_path;
  std::string gt_depth_path;
  std::optional<std::string> camera_depth_path;
  std::optional<std::string> pred_depth_path;
  std::string intrinsics_ref;
};

struct DatasetManifest {
  std::string base_dir;  // directory of the manifest file; paths resolve against it
  std::vector<SampleRecord> samples;
  std::map<std::string, Intrinsics> intrinsics;
  std::map<std::string, std::string> metadata;

  std::string resolve(const std::string& rel_path) const;
  const Intrinsics& intrinsics_for(const SampleRecord& rec) const;
};

struct ManifestIssue {
  std::string sample_id;  // empty for manifest-level issues
  std::string message;
};

// Parses the line-based manifest format (see README). Throws on malformed
// syntax or duplicate sample ids.
DatasetManifest load_manifest(const std::string& path);

// Reports unresolvable file references without aborting; empty means clean.
std::vector<ManifestIssue> validate_manifest(const DatasetManifest& m);

}  // namespace camdepth
