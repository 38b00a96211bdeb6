#include "camdepth/traj.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace camdepth {

void JointTrajectory::check() const {
  if (timestamps.size() < 3) throw std::invalid_argument("trajectory needs at least 3 samples");
  if (joint_names.size() != joints.size())
    throw std::invalid_argument("trajectory joint name/channel count mismatch");
  for (std::size_t t = 1; t < timestamps.size(); ++t)
    if (!(timestamps[t] > timestamps[t - 1]))
      throw std::invalid_argument("trajectory timestamps must be strictly increasing");
  for (const auto& channel : joints) {
    if (channel.size() != timestamps.size())
      throw std::invalid_argument("trajectory has ragged joint channels");
    for (double q : channel)
      if (!std::isfinite(q)) throw std::invalid_argument("trajectory has non-finite positions");
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

JointTrajectory load_traj(const std::string& path, std::optional<double> rate) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory CSV: " + path);
  if (rate && !(*rate > 0.0)) throw std::invalid_argument("load_traj: rate must be > 0");

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_csv(line));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty CSV");

  JointTrajectory traj;
  std::size_t first_data = 0;
  bool has_time_column = false;

  if (!rate) {
    // Header mode: first row must be "t,<name>,...".
    if (rows[0].empty() || rows[0][0] != "t")
      throw std::runtime_error(path + ": expected header starting with 't' (or pass a rate)");
    if (rows[0].size() < 2) throw std::runtime_error(path + ": header has no joint columns");
    traj.joint_names.assign(rows[0].begin() + 1, rows[0].end());
    first_data = 1;
    has_time_column = true;
  }

  std::size_t n_cols = 0;
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (n_cols == 0) {
      n_cols = rows[r].size();
      if (!has_time_column) {
        if (n_cols < 1) throw std::runtime_error(path + ": empty data row");
        for (std::size_t j = 0; j < n_cols; ++j) traj.joint_names.push_back("j" + std::to_string(j + 1));
      } else if (n_cols != traj.joint_names.size() + 1) {
        throw std::runtime_error(path + ": row width does not match header");
      }
      traj.joints.assign(traj.joint_names.size(), {});
    }
    if (rows[r].size() != n_cols)
      throw std::runtime_error(path + ": ragged row " + std::to_string(r + 1));

    std::size_t col = 0;
    if (has_time_column) {
      double t;
      if (!parse_number(rows[r][0], t))
        throw std::runtime_error(path + ": bad timestamp '" + rows[r][0] + "'");
      traj.timestamps.push_back(t);
      col = 1;
    }
    for (std::size_t j = 0; col < n_cols; ++col, ++j) {
      double q;
      if (!parse_number(rows[r][col], q))
        throw std::runtime_error(path + ": bad value '" + rows[r][col] + "'");
      traj.joints[j].push_back(q);
    }
  }

  if (!has_time_column) {
    const std::size_t t_count = traj.joints.empty() ? 0 : traj.joints[0].size();
    for (std::size_t k = 0; k < t_count; ++k)
      traj.timestamps.push_back(static_cast<double>(k) / *rate);
  }

  traj.check();
  return traj;
}

namespace {

// Central second difference at interior samples; divided-difference form,
// exact on quadratics for any strictly increasing sampling.
std::vector<double> accel_samples(const std::vector<double>& t, const std::vector<double>& q) {
  std::vector<double> a(t.size() - 2);
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double dt0 = t[k] - t[k - 1];
    const double dt1 = t[k + 1] - t[k];
    a[k - 1] = 2.0 * ((q[k + 1] - q[k]) / dt1 - (q[k] - q[k - 1]) / dt0) / (dt0 + dt1);
  }
  return a;
}

}  // namespace

std::vector<double> mean_abs_accel(const JointTrajectory& traj) {
  traj.check();
  std::vector<double> out;
  out.reserve(traj.num_joints());
  for (const auto& q : traj.joints) {
    const std::vector<double> a = accel_samples(traj.timestamps, q);
    double sum = 0.0;
    for (double v : a) sum += std::abs(v);
    out.push_back(sum / a.size());
  }
  return out;
}

std::vector<double> rms_jerk(const JointTrajectory& traj) {
  traj.check();
  if (traj.length() < 4) throw std::invalid_argument("rms_jerk needs at least 4 samples");
  std::vector<double> out;
  out.reserve(traj.num_joints());
  for (const auto& q : traj.joints) {
    const std::vector<double> a = accel_samples(traj.timestamps, q);
    double sum_sq = 0.0;
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
      // Acceleration samples sit at the interior timestamps.
      const double dt = traj.timestamps[k + 2] - traj.timestamps[k + 1];
      const double j = (a[k + 1] - a[k]) / dt;
      sum_sq += j * j;
    }
    out.push_back(std::sqrt(sum_sq / (a.size() - 1)));
  }
  return out;
}

}  // namespace camdepth
