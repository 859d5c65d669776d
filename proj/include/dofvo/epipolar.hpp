#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dofvo/error.hpp"
#include "dofvo/optical_flow.hpp"
#include "dofvo/se3.hpp"

namespace dofvo {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  Mat3 matrix() const;
  /// Pixel -> normalized image plane.
  Vec2 normalize(const Vec2& px) const { return {(px.x() - cx) / fx, (px.y() - cy) / fy}; }
  Vec2 project(const Vec3& p) const { return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy}; }
  /// Throws usage_error when the focal lengths are non-positive or the principal point is outside the image.
  void validate(int width, int height) const;
};

struct RansacConfig {
  int max_iterations = 2000;
  bool adaptive = true;
  double confidence = 0.999;
  double threshold_px = 1.0;  // Sampson distance
  std::uint64_t seed = 42;
};

class InsufficientCorrespondencesError : public Error {
 public:
  explicit InsufficientCorrespondencesError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class DegenerateGeometryError : public Error {
 public:
  explicit DegenerateGeometryError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class CheiralityAmbiguousError : public Error {
 public:
  explicit CheiralityAmbiguousError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Essential matrix on the (s, s, 0) manifold with ||E||_F = sqrt(2).
struct EssentialMatrix {
  Mat3 matrix = Mat3::Zero();
  std::vector<std::uint8_t> inlier_mask;
  std::size_t inlier_count = 0;
};

/// Rank-2 fundamental matrix with ||F||_F = 1.
struct FundamentalMatrix {
  Mat3 matrix = Mat3::Zero();
  std::vector<std::uint8_t> inlier_mask;
  std::size_t inlier_count = 0;
};

/// Motion of camera b relative to camera a as a point map X_b = R X_a + t.
struct RecoveredPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation_direction = Vec3::UnitZ();
  std::size_t inlier_count = 0;
  std::array<std::size_t, 4> cheirality_votes{};
  std::size_t chosen = 0;

  /// Pose of camera b expressed in camera a's frame (unit-length translation).
  Transform camera_motion() const;
};

struct Triangulation {
  Vec3 point = Vec3::Zero();  // in camera a's frame
  bool positive_depth_a = false;
  bool positive_depth_b = false;
  bool no_parallax = false;
};

/// First-order geometric distance of (xa, xb) to the epipolar curve of `f`, in the units of the points.
double sampson_distance(const Mat3& f, const Vec2& xa, const Vec2& xb);

EssentialMatrix estimate_essential(const Correspondences& c, const CameraIntrinsics& k, const RansacConfig& cfg = {});
FundamentalMatrix estimate_fundamental(const Correspondences& c, const RansacConfig& cfg = {});

/// E = K^T F K, projected onto the essential manifold.
EssentialMatrix essential_from_fundamental(const FundamentalMatrix& f, const CameraIntrinsics& k);

/// Projects a 3x3 matrix onto the essential manifold: singular values (1, 1, 0), Frobenius norm sqrt(2).
Mat3 project_to_essential(const Mat3& m);

RecoveredPose recover_pose(const EssentialMatrix& e, const Correspondences& c, const CameraIntrinsics& k);

/// Midpoint triangulation of normalized image points for cameras [I|0] and [R|t].
Triangulation triangulate(const Vec2& xa, const Vec2& xb, const Mat3& rotation, const Vec3& translation);

Mat3 skew(const Vec3& v);

}  // namespace dofvo
