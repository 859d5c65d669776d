#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "dofvo/epipolar.hpp"
#include "dofvo/euroc_io.hpp"
#include "dofvo/image.hpp"
#include "dofvo/se3.hpp"

namespace dofvo::synthetic {

/// Renders world points as Gaussian sprites seen from `camera_in_world`
/// (camera looks along +z, x right, y down).
GrayImage render_points(const std::vector<Vec3>& points, const Transform& camera_in_world, const CameraIntrinsics& k,
                        int width, int height, double sprite_sigma = 1.6);

enum class Motion {
  Straight,  // 0.1 m per frame along +x, identity orientation
  Smooth,    // forward/sideways drift with small yaw, pitch and roll oscillations
};

struct DatasetSpec {
  int frames = 20;
  int width = 320;
  int height = 240;
  CameraIntrinsics intrinsics{250.0, 250.0, 160.0, 120.0};
  Motion motion = Motion::Smooth;
  Nanoseconds start_ns = 1'000'000'000;
  Nanoseconds frame_period_ns = 50'000'000;  // 20 Hz camera
  int gt_per_frame = 10;                     // 200 Hz ground truth
  std::uint64_t seed = 7;
  std::set<int> corrupt_frames;  // rendered as flat white
  bool write_images = true;
};

/// Camera pose at fractional frame index `f`.
Transform camera_pose(Motion motion, double f);

/// Writes `<root>/mav0/cam0/{data.csv,data/*.png}` and
/// `<root>/mav0/state_groundtruth_estimate0/data.csv`.
void write_dataset(const std::filesystem::path& root, const DatasetSpec& spec);

/// Random scene points covering the field of view along the whole trajectory.
std::vector<Vec3> scene_points(const DatasetSpec& spec);

}  // namespace dofvo::synthetic
