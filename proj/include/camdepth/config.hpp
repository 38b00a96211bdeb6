#pragma once

#include <string>

#include "camdepth/noise.hpp"

namespace camdepth {

// Parses the key-value synthesis config (see configs/synth_example.cfg for the
// documented schema). Stage and layer order follows file order.
NoisePipelineConfig parse_pipeline_config(const std::string& text);
NoisePipelineConfig load_pipeline_config(const std::string& path);

// Batch-run settings shared by the manifest-driven CLI commands.
struct RunConfig {
  std::string manifest_path;
  NoisePipelineConfig pipeline;
  std::string output_dir;
  int workers = 1;
  std::uint64_t seed = 0;
  bool json_reports = true;
  bool csv_reports = true;

  void check() const {
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
    if (!json_reports && !csv_reports)
      throw std::invalid_argument("at least one report format is required");
  }
};

}  // namespace camdepth
