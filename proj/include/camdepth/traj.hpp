#pragma once

#include <optional>
#include <string>
#include <vector>

#include "camdepth/field.hpp"

namespace camdepth {

// Joint-space trajectory; timestamps strictly increasing, T >= 3.
struct JointTrajectory {
  std::vector<double> timestamps;            // seconds
  std::vector<std::string> joint_names;      // size J
  std::vector<std::vector<double>> joints;   // J channels of T positions, radians

  std::size_t length() const { return timestamps.size(); }
  std::size_t num_joints() const { return joints.size(); }

  void check() const;
};

// CSV with header "t,<name>,..." carrying timestamps, or headerless numeric
// rows with a uniform rate (timestamps synthesized as k / rate, names j1..jJ).
JointTrajectory load_traj(const std::string& path, std::optional<double> rate = std::nullopt);

// Mean |central second difference| per joint, rad/s^2. Divided-difference
// form, exact on quadratics for any sampling.
std::vector<double> mean_abs_accel(const JointTrajectory& traj);

// RMS of differenced acceleration per joint, rad/s^3. Requires T >= 4.
std::vector<double> rms_jerk(const JointTrajectory& traj);

}  // namespace camdepth
