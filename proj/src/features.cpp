#include "dofvo/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradients.hpp"

namespace dofvo {

std::vector<double> harris_response(const GrayImage& img, const HarrisConfig& cfg) {
  const int w = img.width(), h = img.height();
  const Gradients g = sobel_gradients(img);
  std::vector<double> xx(g.x.size()), yy(g.x.size()), xy(g.x.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    xx[i] = g.x[i] * g.x[i];
    yy[i] = g.y[i] * g.y[i];
    xy[i] = g.x[i] * g.y[i];
  }
  const int r = cfg.block_size / 2;
  const auto sxx = box_sum(xx, w, h, r);
  const auto syy = box_sum(yy, w, h, r);
  const auto sxy = box_sum(xy, w, h, r);
  std::vector<double> resp(g.x.size());
  for (std::size_t i = 0; i < resp.size(); ++i) {
    const double det = sxx[i] * syy[i] - sxy[i] * sxy[i];
    const double tr = sxx[i] + syy[i];
    resp[i] = det - cfg.k * tr * tr;
  }
  return resp;
}

FeatureSet harris_corners(const GrayImage& img, const HarrisConfig& cfg) {
  const int w = img.width(), h = img.height();
  const auto resp = harris_response(img, cfg);
  const auto at = [&](int x, int y) { return resp[static_cast<std::size_t>(y) * w + x]; };

  const int margin = std::max(cfg.border, 1);
  double max_r = 0.0;
  for (int y = margin; y < h - margin; ++y)
    for (int x = margin; x < w - margin; ++x) max_r = std::max(max_r, at(x, y));
  FeatureSet out;
  if (max_r <= 0.0) return out;
  const double threshold = cfg.quality * max_r;

  struct Candidate {
    int x, y;
    double r;
  };
  std::vector<Candidate> cands;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const double v = at(x, y);
      if (v <= threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double n = at(x + dx, y + dy);
          // Plateaus: prefer the first pixel in raster order.
          if (n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) cands.push_back({x, y, v});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.r > b.r; });

  const double min_d2 = cfg.min_distance * cfg.min_distance;
  for (const auto& c : cands) {
    if (static_cast<int>(out.points.size()) >= cfg.max_features) break;
    const bool crowded = std::any_of(out.points.begin(), out.points.end(), [&](const Feature& f) {
      const double dx = std::round(f.x) - c.x, dy = std::round(f.y) - c.y;
      return dx * dx + dy * dy < min_d2;
    });
    if (crowded) continue;
    // Parabolic peak interpolation along each axis.
    const auto offset = [](double lo, double mid, double hi) {
      const double denom = lo - 2.0 * mid + hi;
      if (denom >= 0.0) return 0.0;
      return std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
    };
    const double ox = offset(at(c.x - 1, c.y), c.r, at(c.x + 1, c.y));
    const double oy = offset(at(c.x, c.y - 1), c.r, at(c.x, c.y + 1));
    out.points.push_back({c.x + ox, c.y + oy, c.r});
  }
  return out;
}

FeatureSet shi_tomasi_rescore(const GrayImage& img, const FeatureSet& features, const ShiTomasiConfig& cfg) {
  FeatureSet out;
  if (features.empty()) return out;
  const Gradients g = sobel_gradients(img);
  const int w = img.width(), h = img.height();
  std::vector<Feature> scored;
  scored.reserve(features.size());
  double max_score = 0.0;
  for (const auto& f : features.points) {
    const int cx = static_cast<int>(std::lround(f.x)), cy = static_cast<int>(std::lround(f.y));
    double a = 0, b = 0, c = 0;
    for (int y = cy - cfg.patch_radius; y <= cy + cfg.patch_radius; ++y) {
      for (int x = cx - cfg.patch_radius; x <= cx + cfg.patch_radius; ++x) {
        const std::size_t i = static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1);
        a += g.x[i] * g.x[i];
        b += g.x[i] * g.y[i];
        c += g.y[i] * g.y[i];
      }
    }
    const double min_eig = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    scored.push_back({f.x, f.y, min_eig});
    max_score = std::max(max_score, min_eig);
  }
  const double threshold = cfg.quality * max_score;
  for (const auto& f : scored)
    if (f.score >= threshold && f.score > 0.0) out.points.push_back(f);
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const Feature& a, const Feature& b) { return a.score > b.score; });
  return out;
}

}  // namespace dofvo
