#include "dofvo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dofvo::synthetic {

GrayImage render_points(const std::vector<Vec3>& points, const Transform& camera_in_world, const CameraIntrinsics& k,
                        int width, int height, double sprite_sigma) {
  GrayImage img(width, height, 0.1);
  const Transform world_to_cam = invert(camera_in_world);
  const int radius = static_cast<int>(std::ceil(3.0 * sprite_sigma));
  const double inv2s2 = 1.0 / (2.0 * sprite_sigma * sprite_sigma);
  for (const auto& pw : points) {
    const Vec3 pc = world_to_cam.apply(pw);
    if (pc.z() < 0.5) continue;
    const Vec2 uv = k.project(pc);
    if (uv.x() < -radius || uv.y() < -radius || uv.x() > width + radius || uv.y() > height + radius) continue;
    const int x0 = static_cast<int>(std::floor(uv.x())), y0 = static_cast<int>(std::floor(uv.y()));
    for (int y = y0 - radius; y <= y0 + radius + 1; ++y) {
      if (y < 0 || y >= height) continue;
      for (int x = x0 - radius; x <= x0 + radius + 1; ++x) {
        if (x < 0 || x >= width) continue;
        const double dx = x - uv.x(), dy = y - uv.y();
        img(x, y) += 0.8 * std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
    }
  }
  for (auto& v : img.pixels()) v = std::min(v, 1.0);
  return img;
}

Transform camera_pose(Motion motion, double f) {
  if (motion == Motion::Straight) return Transform::from_translation({0.1 * f, 0.0, 0.0});
  const double t = f * 0.05;  // seconds at 20 Hz
  Transform pose;
  pose.translation = {0.6 * t + 0.15 * std::sin(1.3 * t), 0.08 * std::sin(0.9 * t), 0.5 * t + 0.1 * std::sin(0.7 * t)};
  pose.rotation = euler_to_rotation({0.05 * std::sin(1.1 * t), 0.08 * std::sin(0.8 * t), 0.04 * std::sin(1.7 * t), false});
  return pose;
}

std::vector<Vec3> scene_points(const DatasetSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> points;
  // Scatter points in each keyframe's frustum so coverage follows the path.
  const int stride = 5;
  const int per_view = std::max(40, spec.width * spec.height / 1200);
  for (int f = 0; f < spec.frames + stride; f += stride) {
    const Transform pose = camera_pose(spec.motion, f);
    for (int i = 0; i < per_view; ++i) {
      const double z = 3.0 + 6.0 * unit(rng);
      const double u = (unit(rng) * 1.2 - 0.1) * spec.width;
      const double v = (unit(rng) * 1.2 - 0.1) * spec.height;
      const Vec3 pc((u - spec.intrinsics.cx) / spec.intrinsics.fx * z, (v - spec.intrinsics.cy) / spec.intrinsics.fy * z, z);
      points.push_back(pose.apply(pc));
    }
  }
  return points;
}

void write_dataset(const std::filesystem::path& root, const DatasetSpec& spec) {
  const EurocLayout layout{root, "cam0"};
  std::filesystem::create_directories(layout.image_dir());
  std::filesystem::create_directories(layout.groundtruth().parent_path());
  const auto points = scene_points(spec);

  std::vector<FrameRecord> frames;
  for (int f = 0; f < spec.frames; ++f) {
    const Nanoseconds ts = spec.start_ns + f * spec.frame_period_ns;
    FrameRecord rec{ts, std::to_string(ts) + ".png"};
    if (spec.write_images) {
      const GrayImage img = spec.corrupt_frames.count(f)
                                ? GrayImage(spec.width, spec.height, 1.0)
                                : render_points(points, camera_pose(spec.motion, f), spec.intrinsics, spec.width,
                                                spec.height);
      save_png(img, layout.image_path(rec));
    }
    frames.push_back(std::move(rec));
  }
  write_camera_index(layout.camera_index(), frames);

  std::vector<GroundTruthRecord> gt;
  const int steps = (spec.frames - 1) * spec.gt_per_frame;
  for (int s = 0; s <= steps; ++s) {
    const double f = static_cast<double>(s) / spec.gt_per_frame;
    const Transform pose = camera_pose(spec.motion, f);
    GroundTruthRecord r;
    r.timestamp = spec.start_ns + s * spec.frame_period_ns / spec.gt_per_frame;
    r.position = pose.translation;
    r.orientation = rotation_to_quat(pose.rotation);
    gt.push_back(r);
  }
  write_groundtruth(layout.groundtruth(), gt);
}

}  // namespace dofvo::synthetic
