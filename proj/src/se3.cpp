#include "dofvo/se3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace dofvo {

namespace {

// Distance of |ry| from pi/2 below which the X and Z axes are treated as aligned.
constexpr double kGimbalTolerance = 1e-6;

double wrap_pi(double a) {
  // (-pi, pi]
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

Mat4 Transform::homogeneous() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

bool DoFVector::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 err = r.transpose() * r - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Transform compose(const Transform& a, const Transform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Transform invert(const Transform& t) {
  const Mat3 rt = t.rotation.transpose();
  return {rt, -rt * t.translation};
}

Transform relative_pose(const Transform& world_a, const Transform& world_b) {
  return compose(invert(world_a), world_b);
}

Quaternion normalized(const Quaternion& q) {
  const double n = q.norm();
  if (!(n >= 1e-12)) {
    throw DegenerateQuaternionError(ErrorKind::Numerical, "degenerate quaternion: norm below 1e-12");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Mat3 quat_to_rotation(const Quaternion& q_in) {
  const Quaternion q = normalized(q_in);
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Quaternion rotation_to_quat(const Mat3& r) {
  // Branch on the largest of (trace, r00, r11, r22) for conditioning.
  Quaternion q;
  const double trace = r.trace();
  if (trace >= r(0, 0) && trace >= r(1, 1) && trace >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + trace);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  q = normalized(q);
  if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
  return q;
}

Mat3 euler_to_rotation(const EulerAngles& e) { return rot_z(e.rz) * rot_y(e.ry) * rot_x(e.rx); }

EulerAngles rotation_to_euler(const Mat3& r) {
  // r(2,0) = -sin(ry)
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  EulerAngles e;
  e.ry = std::asin(s);
  if (std::abs(std::abs(e.ry) - std::numbers::pi / 2.0) < kGimbalTolerance) {
    // Only rz - rx (ry > 0) or rz + rx (ry < 0) is observable; pin rx to zero.
    e.gimbal_locked = true;
    e.rx = 0.0;
    e.ry = std::copysign(std::numbers::pi / 2.0, s);
    e.rz = wrap_pi(std::atan2(-r(0, 1), r(1, 1)));
    return e;
  }
  e.rx = wrap_pi(std::atan2(r(2, 1), r(2, 2)));
  e.rz = wrap_pi(std::atan2(r(1, 0), r(0, 0)));
  return e;
}

DoFVector transform_to_dof(const Transform& t, bool* gimbal_locked) {
  const EulerAngles e = rotation_to_euler(t.rotation);
  if (gimbal_locked != nullptr) *gimbal_locked = e.gimbal_locked;
  return {t.translation.x(), t.translation.y(), t.translation.z(), e.rx, e.ry, e.rz};
}

Transform dof_to_transform(const DoFVector& d) {
  return {euler_to_rotation({d.rx(), d.ry(), d.rz(), false}), d.translation()};
}

Mat3 orthonormalize(const Mat3& m) {
  if (!m.allFinite()) throw DegenerateMatrixError(ErrorKind::Numerical, "orthonormalize: non-finite matrix");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(2) <= 1e-12 * std::max(1.0, sv(0))) {
    throw DegenerateMatrixError(ErrorKind::Numerical, "orthonormalize: rank-deficient matrix");
  }
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    // The nearest orthogonal matrix is a reflection; m does not approximate any rotation.
    if (m.determinant() <= 0.0) {
      throw DegenerateMatrixError(ErrorKind::Numerical, "orthonormalize: matrix has non-positive determinant");
    }
    u.col(2) = -u.col(2);
  }
  return u * v.transpose();
}

double rotation_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos is ill-conditioned near 0; use the skew part for small angles.
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * axis.norm(), c);
}

}  // namespace dofvo
