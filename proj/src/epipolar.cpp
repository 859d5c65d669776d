#include "dofvo/epipolar.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace dofvo {

namespace {

constexpr std::size_t kSampleSize = 8;

// Ratio of the 8th to the 1st singular value of the design matrix below which
// the null space is treated as more than one-dimensional.
constexpr double kDegenerateRatio = 1e-8;

struct Normalizer {
  Mat3 t = Mat3::Identity();
};

// Isotropic scaling: centroid at origin, mean distance sqrt(2).
Normalizer hartley(const std::vector<Vec2>& pts, const std::vector<std::size_t>& idx) {
  Vec2 c = Vec2::Zero();
  for (auto i : idx) c += pts[i];
  c /= static_cast<double>(idx.size());
  double mean_dist = 0.0;
  for (auto i : idx) mean_dist += (pts[i] - c).norm();
  mean_dist /= static_cast<double>(idx.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Normalizer n;
  n.t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return n;
}

// Linear eight-point fit of x_b^T F x_a = 0. Returns nullopt for degenerate configurations.
std::optional<Mat3> eight_point(const std::vector<Vec2>& pa, const std::vector<Vec2>& pb,
                                const std::vector<std::size_t>& idx) {
  if (idx.size() < kSampleSize) return std::nullopt;
  const Normalizer na = hartley(pa, idx);
  const Normalizer nb = hartley(pb, idx);
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(static_cast<Eigen::Index>(idx.size()), 9);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const Vec3 xa = na.t * pa[idx[r]].homogeneous();
    const Vec3 xb = nb.t * pb[idx[r]].homogeneous();
    a.row(static_cast<Eigen::Index>(r)) << xb.x() * xa.x(), xb.x() * xa.y(), xb.x(), xb.y() * xa.x(),
        xb.y() * xa.y(), xb.y(), xa.x(), xa.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(7) / sv(0) < kDegenerateRatio) return std::nullopt;
  const Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(8);
  Mat3 fn;
  fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  Mat3 out = nb.t.transpose() * fn * na.t;
  if (!out.allFinite()) return std::nullopt;
  return out;
}

Mat3 project_rank2(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = svd.singularValues();
  s(2) = 0.0;
  Mat3 out = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return out / out.norm();
}

// Portable uniform index draw (std::uniform_int_distribution is implementation-defined).
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

std::vector<std::size_t> sample_indices(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> out;
  out.reserve(kSampleSize);
  while (out.size() < kSampleSize) {
    const std::size_t i = draw_index(rng, n);
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

struct Consensus {
  std::vector<std::uint8_t> mask;
  std::size_t count = 0;
  double cost = 0.0;
};

// `fit` maps sample indices to a model in the fitting coordinates; `pixel_f`
// converts that model to a pixel-space fundamental matrix for scoring.
template <typename Fit, typename ToPixel>
std::pair<Mat3, Consensus> ransac(const Correspondences& c, const RansacConfig& cfg, Fit fit, ToPixel pixel_f) {
  const std::size_t n = c.size();
  const double thr = cfg.threshold_px;
  const auto score = [&](const Mat3& model) {
    const Mat3 f = pixel_f(model);
    Consensus s;
    s.mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sampson_distance(f, c.a[i], c.b[i]);
      if (d <= thr) {
        s.mask[i] = 1;
        ++s.count;
        s.cost += d * d;
      } else {
        s.cost += thr * thr;
      }
    }
    return s;
  };
  const auto better = [](const Consensus& x, const Consensus& y) {
    return x.count > y.count || (x.count == y.count && x.cost < y.cost);
  };

  std::mt19937_64 rng(cfg.seed);
  std::optional<Mat3> best_model;
  Consensus best;
  long budget = cfg.max_iterations;
  for (long it = 0; it < budget; ++it) {
    const auto idx = sample_indices(rng, n);
    const auto model = fit(idx);
    if (!model) continue;
    Consensus s = score(*model);
    if (!best_model || better(s, best)) {
      best_model = *model;
      best = std::move(s);
      if (cfg.adaptive) {
        const double w = static_cast<double>(best.count) / static_cast<double>(n);
        const double p_fail = 1.0 - std::pow(w, static_cast<double>(kSampleSize));
        if (p_fail <= 0.0) {
          budget = std::min<long>(budget, it + 1);
        } else if (p_fail < 1.0) {
          const double need = std::log(1.0 - cfg.confidence) / std::log(p_fail);
          budget = std::min<long>(cfg.max_iterations, static_cast<long>(std::ceil(need)));
        }
      }
    }
  }
  if (!best_model || best.count < kSampleSize) {
    throw DegenerateGeometryError("RANSAC consensus below 8 correspondences");
  }

  // Least-squares re-estimate on the consensus set, kept while the truncated
  // cost drops. A minimal-sample model carries the full noise of 8 points.
  Mat3 model = *best_model;
  for (int round = 0; round < 5; ++round) {
    std::vector<std::size_t> inliers;
    for (std::size_t i = 0; i < n; ++i)
      if (best.mask[i]) inliers.push_back(i);
    const auto refined = fit(inliers);
    if (!refined) break;
    Consensus s = score(*refined);
    if (s.count < kSampleSize || s.cost >= best.cost) break;
    model = *refined;
    best = std::move(s);
  }
  if (best.count < kSampleSize) throw DegenerateGeometryError("RANSAC consensus below 8 correspondences");
  return {model, best};
}

// Truncated-quadratic consensus of a pixel-space fundamental matrix.
Consensus score_pixel(const Mat3& f, const Correspondences& c, double thr) {
  Consensus s;
  s.mask.assign(c.size(), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = sampson_distance(f, c.a[i], c.b[i]);
    if (d <= thr) {
      s.mask[i] = 1;
      ++s.count;
      s.cost += d * d;
    } else {
      s.cost += thr * thr;
    }
  }
  return s;
}

// Levenberg-Marquardt on E = [t]x R over the current inliers, minimizing the
// squared pixel Sampson distance. R is updated by a right-multiplied rotation
// vector, t moves in the tangent plane of the unit sphere.
Mat3 polish_essential(const Mat3& e, const Correspondences& c, const std::vector<std::uint8_t>& mask,
                      const Mat3& k_inv) {
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU(), v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  Mat3 rot = u * w * v.transpose();
  Vec3 t = u.col(2);

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(i);
  const auto m = static_cast<Eigen::Index>(idx.size());
  const auto residuals = [&](const Mat3& r, const Vec3& tt) {
    const Mat3 f = k_inv.transpose() * skew(tt) * r * k_inv;
    Eigen::VectorXd res(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t i = idx[static_cast<std::size_t>(j)];
      const Vec3 a = c.a[i].homogeneous(), b = c.b[i].homogeneous();
      const Vec3 fa = f * a, ftb = f.transpose() * b;
      const double den = std::sqrt(fa.x() * fa.x() + fa.y() * fa.y() + ftb.x() * ftb.x() + ftb.y() * ftb.y());
      res(j) = den > 0.0 ? b.dot(fa) / den : 0.0;
    }
    return res;
  };
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  const auto apply = [](const Mat3& r, const Vec3& tt, const Vec5& d, Mat3& r_out, Vec3& t_out) {
    const Vec3 omega = d.head<3>();
    const double angle = omega.norm();
    r_out = angle > 0.0 ? Mat3(r * Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix()) : r;
    const Vec3 b1 = tt.unitOrthogonal(), b2 = tt.cross(b1);
    t_out = (tt + d(3) * b1 + d(4) * b2).normalized();
  };

  Eigen::VectorXd res = residuals(rot, t);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  constexpr double kStep = 1e-7;
  for (int it = 0; it < 30 && cost > 0.0; ++it) {
    Eigen::Matrix<double, Eigen::Dynamic, 5> jac(m, 5);
    for (int p = 0; p < 5; ++p) {
      Vec5 d = Vec5::Zero();
      d(p) = kStep;
      Mat3 rp;
      Vec3 tp;
      apply(rot, t, d, rp, tp);
      jac.col(p) = (residuals(rp, tp) - res) / kStep;
    }
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Vec5 jtr = jac.transpose() * res;
    bool improved = false;
    for (int tries = 0; tries < 10; ++tries) {
      Eigen::Matrix<double, 5, 5> a = jtj;
      a.diagonal() *= 1.0 + lambda;
      const Vec5 step = a.ldlt().solve(-jtr);
      if (!step.allFinite()) break;
      Mat3 rn;
      Vec3 tn;
      apply(rot, t, step, rn, tn);
      const Eigen::VectorXd rn_res = residuals(rn, tn);
      const double c_new = rn_res.squaredNorm();
      if (c_new < cost) {
        rot = rn;
        t = tn;
        res = rn_res;
        const double gain = cost - c_new;
        cost = c_new;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (gain < 1e-12 * (1.0 + cost)) it = 30;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return project_to_essential(skew(t) * orthonormalize(rot));
}

void require_eight(const Correspondences& c) {
  if (c.size() < kSampleSize) {
    throw InsufficientCorrespondencesError("need at least 8 correspondences, got " + std::to_string(c.size()));
  }
}

}  // namespace

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

void CameraIntrinsics::validate(int width, int height) const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw usage_error("camera intrinsics: focal lengths must be positive");
  if (cx < 0.0 || cy < 0.0 || cx > width || cy > height) {
    throw usage_error("camera intrinsics: principal point outside the image");
  }
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

double sampson_distance(const Mat3& f, const Vec2& xa, const Vec2& xb) {
  const Vec3 a = xa.homogeneous(), b = xb.homogeneous();
  const Vec3 fa = f * a;
  const Vec3 ftb = f.transpose() * b;
  const double num = b.dot(fa);
  const double den = fa.x() * fa.x() + fa.y() * fa.y() + ftb.x() * ftb.x() + ftb.y() * ftb.y();
  if (den <= 0.0) return std::abs(num) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::abs(num) / std::sqrt(den);
}

Mat3 project_to_essential(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * Vec3(1.0, 1.0, 0.0).asDiagonal() * svd.matrixV().transpose();
}

EssentialMatrix estimate_essential(const Correspondences& c, const CameraIntrinsics& k, const RansacConfig& cfg) {
  require_eight(c);
  std::vector<Vec2> na(c.size()), nb(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    na[i] = k.normalize(c.a[i]);
    nb[i] = k.normalize(c.b[i]);
  }
  const Mat3 k_inv = k.matrix().inverse();
  const auto fit = [&](const std::vector<std::size_t>& idx) -> std::optional<Mat3> {
    auto m = eight_point(na, nb, idx);
    if (!m) return std::nullopt;
    return project_to_essential(*m);
  };
  const auto to_pixel = [&](const Mat3& e) -> Mat3 { return k_inv.transpose() * e * k_inv; };
  auto [model, consensus] = ransac(c, cfg, fit, to_pixel);
  // Alternate nonlinear refinement and inlier reselection while the truncated cost drops.
  for (int round = 0; round < 3; ++round) {
    const Mat3 polished = polish_essential(model, c, consensus.mask, k_inv);
    Consensus s = score_pixel(to_pixel(polished), c, cfg.threshold_px);
    if (s.count < kSampleSize || s.cost >= consensus.cost) break;
    model = polished;
    consensus = std::move(s);
  }
  return {model, std::move(consensus.mask), consensus.count};
}

FundamentalMatrix estimate_fundamental(const Correspondences& c, const RansacConfig& cfg) {
  require_eight(c);
  const auto fit = [&](const std::vector<std::size_t>& idx) -> std::optional<Mat3> {
    auto m = eight_point(c.a, c.b, idx);
    if (!m) return std::nullopt;
    return project_rank2(*m);
  };
  auto [model, consensus] = ransac(c, cfg, fit, [](const Mat3& f) { return f; });
  return {model, std::move(consensus.mask), consensus.count};
}

EssentialMatrix essential_from_fundamental(const FundamentalMatrix& f, const CameraIntrinsics& k) {
  const Mat3 km = k.matrix();
  return {project_to_essential(km.transpose() * f.matrix * km), f.inlier_mask, f.inlier_count};
}

Transform RecoveredPose::camera_motion() const {
  return invert(Transform{rotation, translation_direction});
}

Triangulation triangulate(const Vec2& xa, const Vec2& xb, const Mat3& rotation, const Vec3& translation) {
  Triangulation out;
  const Vec3 da = xa.homogeneous();
  const Vec3 db = rotation.transpose() * xb.homogeneous();
  const Vec3 center_b = -rotation.transpose() * translation;
  const double aa = da.squaredNorm(), bb = db.squaredNorm(), ab = da.dot(db);
  const double det = aa * bb - ab * ab;
  if (center_b.norm() < 1e-12 || det / (aa * bb) < 1e-12) {
    out.no_parallax = true;
    return out;
  }
  // Closest points of the rays s*da and center_b + u*db.
  const double rhs_a = da.dot(center_b), rhs_b = db.dot(center_b);
  const double s = (bb * rhs_a - ab * rhs_b) / det;
  const double u = (ab * rhs_a - aa * rhs_b) / det;
  out.point = 0.5 * (s * da + center_b + u * db);
  out.positive_depth_a = out.point.z() > 0.0;
  out.positive_depth_b = (rotation * out.point + translation).z() > 0.0;
  return out;
}

RecoveredPose recover_pose(const EssentialMatrix& e, const Correspondences& c, const CameraIntrinsics& k) {
  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (i < e.inlier_mask.size() ? e.inlier_mask[i] != 0 : e.inlier_mask.empty()) inliers.push_back(i);
  if (inliers.size() < 5) {
    throw InsufficientCorrespondencesError("recover_pose needs at least 5 inliers, got " +
                                           std::to_string(inliers.size()));
  }
  Eigen::JacobiSVD<Mat3> svd(e.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU(), v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 r1 = u * w * v.transpose();
  const Mat3 r2 = u * w.transpose() * v.transpose();
  const Vec3 t = u.col(2).normalized();
  const std::array<std::pair<Mat3, Vec3>, 4> candidates{{{r1, t}, {r1, -t}, {r2, t}, {r2, -t}}};

  std::vector<Vec2> na, nb;
  for (auto i : inliers) {
    na.push_back(k.normalize(c.a[i]));
    nb.push_back(k.normalize(c.b[i]));
  }
  RecoveredPose out;
  out.inlier_count = inliers.size();
  std::array<std::size_t, 4> usable{};
  for (std::size_t ci = 0; ci < 4; ++ci) {
    for (std::size_t j = 0; j < na.size(); ++j) {
      const Triangulation tri = triangulate(na[j], nb[j], candidates[ci].first, candidates[ci].second);
      if (tri.no_parallax) continue;
      ++usable[ci];
      if (tri.positive_depth_a && tri.positive_depth_b) ++out.cheirality_votes[ci];
    }
  }
  out.chosen = static_cast<std::size_t>(
      std::max_element(out.cheirality_votes.begin(), out.cheirality_votes.end()) - out.cheirality_votes.begin());
  if (usable[out.chosen] == 0 || 2 * out.cheirality_votes[out.chosen] <= usable[out.chosen]) {
    throw CheiralityAmbiguousError("no pose candidate places more than half of the points in front of both cameras");
  }
  out.rotation = candidates[out.chosen].first;
  out.translation_direction = candidates[out.chosen].second;
  return out;
}

}  // namespace dofvo
