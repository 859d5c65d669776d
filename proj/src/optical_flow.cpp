#include "dofvo/optical_flow.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "gradients.hpp"

namespace dofvo {

namespace {

struct Level {
  GrayImage prev;
  GrayImage curr;
  GrayImage grad_x;
  GrayImage grad_y;
};

std::vector<Level> build_pyramid(const GrayImage& prev, const GrayImage& curr, const FlowConfig& cfg) {
  std::vector<Level> levels;
  GrayImage p = prev, c = curr;
  for (int l = 0; l < cfg.levels; ++l) {
    if (l > 0) {
      if (p.width() / 2 < cfg.window || p.height() / 2 < cfg.window) break;
      p = pyr_down(p);
      c = pyr_down(c);
    }
    Gradients g = sobel_gradients(p);
    levels.push_back({p, c, GrayImage(p.width(), p.height(), std::move(g.x)),
                      GrayImage(p.width(), p.height(), std::move(g.y))});
  }
  return levels;
}

bool inside(const GrayImage& img, const Vec2& q, double slack) {
  return q.x() >= -slack && q.y() >= -slack && q.x() <= img.width() - 1 + slack && q.y() <= img.height() - 1 + slack;
}

}  // namespace

TrackResult track_features_detailed(const GrayImage& prev, const GrayImage& curr, const FeatureSet& features,
                                    const FlowConfig& cfg) {
  if (prev.width() != curr.width() || prev.height() != curr.height()) {
    throw usage_error("track_features: image dimensions differ");
  }
  TrackResult result;
  result.status.assign(features.size(), TrackStatus::Ok);
  if (features.empty()) return result;

  const auto pyramid = build_pyramid(prev, curr, cfg);
  const int half = cfg.window / 2;
  const std::size_t n_win = static_cast<std::size_t>(cfg.window) * cfg.window;
  std::vector<double> tmpl(n_win), gx(n_win), gy(n_win);

  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const Vec2 pt(features.points[fi].x, features.points[fi].y);
    Vec2 d = Vec2::Zero();
    TrackStatus status = TrackStatus::Ok;

    for (int l = static_cast<int>(pyramid.size()) - 1; l >= 0 && status == TrackStatus::Ok; --l) {
      const Level& lv = pyramid[static_cast<std::size_t>(l)];
      const Vec2 p = pt / static_cast<double>(1 << l);
      Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
      std::size_t k = 0;
      for (int oy = -half; oy <= half; ++oy)
        for (int ox = -half; ox <= half; ++ox, ++k) {
          const double sx = p.x() + ox, sy = p.y() + oy;
          tmpl[k] = lv.prev.bilinear(sx, sy);
          gx[k] = lv.grad_x.bilinear(sx, sy);
          gy[k] = lv.grad_y.bilinear(sx, sy);
          g(0, 0) += gx[k] * gx[k];
          g(0, 1) += gx[k] * gy[k];
          g(1, 1) += gy[k] * gy[k];
        }
      g(1, 0) = g(0, 1);
      const double tr = g(0, 0) + g(1, 1);
      const double min_eig = (0.5 * tr - std::sqrt(0.25 * (g(0, 0) - g(1, 1)) * (g(0, 0) - g(1, 1)) + g(0, 1) * g(0, 1))) /
                             static_cast<double>(n_win);
      if (min_eig < cfg.min_eigen) {
        if (l == 0) status = TrackStatus::Untextured;
        if (l > 0) d *= 2.0;
        continue;
      }
      const Eigen::Matrix2d g_inv = g.inverse();

      double last_step = 0.0;
      bool converged = false;
      for (int it = 0; it < cfg.max_iterations; ++it) {
        const Vec2 q = p + d;
        if (!inside(lv.curr, q, half)) {
          status = TrackStatus::OutOfBounds;
          break;
        }
        Vec2 b = Vec2::Zero();
        k = 0;
        for (int oy = -half; oy <= half; ++oy)
          for (int ox = -half; ox <= half; ++ox, ++k) {
            const double e = tmpl[k] - lv.curr.bilinear(q.x() + ox, q.y() + oy);
            b.x() += e * gx[k];
            b.y() += e * gy[k];
          }
        const Vec2 step = g_inv * b;
        d += step;
        last_step = step.norm();
        if (!std::isfinite(last_step)) {
          status = TrackStatus::NotConverged;
          break;
        }
        if (last_step < cfg.epsilon) {
          converged = true;
          break;
        }
      }
      if (status == TrackStatus::Ok && l == 0 && !converged && last_step > 10.0 * cfg.epsilon) {
        status = TrackStatus::NotConverged;
      }
      if (l > 0) d *= 2.0;
    }

    const Vec2 pb = pt + d;
    if (status == TrackStatus::Ok && !inside(curr, pb, 0.0)) status = TrackStatus::OutOfBounds;
    if (status == TrackStatus::Ok) {
      double residual = 0.0, mean = 0.0, sq = 0.0;
      std::size_t k = 0;
      for (int oy = -half; oy <= half; ++oy)
        for (int ox = -half; ox <= half; ++ox, ++k) {
          const double j = curr.bilinear(pb.x() + ox, pb.y() + oy);
          residual += std::abs(prev.bilinear(pt.x() + ox, pt.y() + oy) - j);
          mean += j;
          sq += j * j;
        }
      const double n = static_cast<double>(n_win);
      const double variance = sq / n - (mean / n) * (mean / n);
      if (variance < 1e-6) {
        status = TrackStatus::Untextured;
      } else if (residual / n > cfg.max_residual) {
        status = TrackStatus::HighResidual;
      }
    }
    result.status[fi] = status;
    if (status == TrackStatus::Ok) result.tracked.push(pt, pb, fi);
  }
  return result;
}

}  // namespace dofvo
