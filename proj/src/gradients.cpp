#include "gradients.hpp"

#include <algorithm>

namespace dofvo {

Gradients sobel_gradients(const GrayImage& img) {
  const int w = img.width(), h = img.height();
  Gradients g{std::vector<double>(static_cast<std::size_t>(w) * h), std::vector<double>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const double gx = (img(xp, ym) - img(xm, ym)) + 2.0 * (img(xp, y) - img(xm, y)) + (img(xp, yp) - img(xm, yp));
      const double gy = (img(xm, yp) - img(xm, ym)) + 2.0 * (img(x, yp) - img(x, ym)) + (img(xp, yp) - img(xp, ym));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.x[i] = gx / 8.0;
      g.y[i] = gy / 8.0;
    }
  }
  return g;
}

std::vector<double> box_sum(const std::vector<double>& src, int w, int h, int r) {
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -r; d <= r; ++d) s += src[static_cast<std::size_t>(y) * w + std::clamp(x + d, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -r; d <= r; ++d) s += tmp[static_cast<std::size_t>(std::clamp(y + d, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

GrayImage pyr_down(const GrayImage& img) {
  static constexpr double kTaps[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int w = img.width(), h = img.height();
  GrayImage horiz(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) s += kTaps[k + 2] * img.clamped(x + k, y);
      horiz(x, y) = s;
    }
  const int nw = (w + 1) / 2, nh = (h + 1) / 2;
  GrayImage out(nw, nh);
  for (int y = 0; y < nh; ++y)
    for (int x = 0; x < nw; ++x) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) s += kTaps[k + 2] * horiz.clamped(2 * x, 2 * y + k);
      out(x, y) = s;
    }
  return out;
}

}  // namespace dofvo
