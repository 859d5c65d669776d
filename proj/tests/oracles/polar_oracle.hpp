#pragma once

// Orthogonal polar factor by the scaled Newton iteration X <- (X + X^-T) / 2.
// Converges quadratically for nonsingular input; no SVD involved.

#include <Eigen/Dense>

namespace oracle {

inline Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& m, int iterations = 60) {
  Eigen::Matrix3d x = m;
  for (int i = 0; i < iterations; ++i) {
    const Eigen::Matrix3d next = 0.5 * (x + x.inverse().transpose());
    if ((next - x).cwiseAbs().maxCoeff() < 1e-16) return next;
    x = next;
  }
  return x;
}

}  // namespace oracle
