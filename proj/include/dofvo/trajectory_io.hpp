#pragma once

#include <filesystem>
#include <vector>

#include "dofvo/euroc_io.hpp"
#include "dofvo/metrics.hpp"

namespace dofvo {

/// One row of the frontend export
/// `timestamp_a_ns,timestamp_b_ns,tx,ty,tz,rx,ry,rz,inliers,failed`.
struct PoseRow {
  Nanoseconds timestamp_a = 0;
  Nanoseconds timestamp_b = 0;
  DoFVector dof;
  std::size_t inliers = 0;
  bool failed = false;
};

void write_pose_csv(const std::filesystem::path& path, const std::vector<PoseRow>& rows);
std::vector<PoseRow> read_pose_csv(const std::filesystem::path& path);

/// `timestamp_s tx ty tz qx qy qz qw`, seconds printed with 9 decimals.
void write_tum_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_tum_trajectory(const std::filesystem::path& path);

}  // namespace dofvo
