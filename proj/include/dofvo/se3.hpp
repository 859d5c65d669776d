#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "dofvo/error.hpp"

namespace dofvo {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

class DegenerateQuaternionError : public Error {
 public:
  using Error::Error;
};

class DegenerateMatrixError : public Error {
 public:
  using Error::Error;
};

/// Rigid-body transform. `rotation` is expected to lie on SO(3); use
/// orthonormalize() to repair drift.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }
  static Transform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  Mat4 homogeneous() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

/// Hamilton quaternion, scalar first.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

/// Angles of R = Rz(rz) * Ry(ry) * Rx(rx), radians.
struct EulerAngles {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
  bool gimbal_locked = false;
};

/// Six-component motion: translation in meters, then Z-Y-X Euler angles in radians.
struct DoFVector {
  std::array<double, 6> values{};

  static constexpr std::size_t kSize = 6;
  static constexpr const char* kNames[kSize] = {"tx", "ty", "tz", "rx", "ry", "rz"};

  DoFVector() = default;
  DoFVector(double tx, double ty, double tz, double rx, double ry, double rz)
      : values{tx, ty, tz, rx, ry, rz} {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  double tx() const { return values[0]; }
  double ty() const { return values[1]; }
  double tz() const { return values[2]; }
  double rx() const { return values[3]; }
  double ry() const { return values[4]; }
  double rz() const { return values[5]; }

  Vec3 translation() const { return {values[0], values[1], values[2]}; }
  bool all_finite() const;

  friend bool operator==(const DoFVector&, const DoFVector&) = default;
};

bool is_rotation(const Mat3& r, double tol = 1e-9);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

Transform compose(const Transform& a, const Transform& b);
Transform invert(const Transform& t);

/// Pose of `world_b` expressed in the frame of `world_a`: inv(a) * b.
Transform relative_pose(const Transform& world_a, const Transform& world_b);

/// Throws DegenerateQuaternionError when |q| < 1e-12. Non-unit input is normalized.
Mat3 quat_to_rotation(const Quaternion& q);
Quaternion rotation_to_quat(const Mat3& r);
Quaternion normalized(const Quaternion& q);

Mat3 euler_to_rotation(const EulerAngles& e);
EulerAngles rotation_to_euler(const Mat3& r);

DoFVector transform_to_dof(const Transform& t, bool* gimbal_locked = nullptr);
Transform dof_to_transform(const DoFVector& d);

/// Nearest rotation in the Frobenius sense. Throws DegenerateMatrixError for
/// reflections and rank-deficient input.
Mat3 orthonormalize(const Mat3& m);

/// Rotation angle of r in [0, pi].
double rotation_angle(const Mat3& r);

}  // namespace dofvo
