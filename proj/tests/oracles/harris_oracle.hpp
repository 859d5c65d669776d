#pragma once

// Dense Harris response computed pixel by pixel with explicit loops, and a
// brute-force local-maximum search. Replicated borders, Sobel scaled by 1/8.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

struct DenseImage {
  int w = 0, h = 0;
  std::vector<double> v;
  double at(int x, int y) const {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return v[static_cast<std::size_t>(y) * w + x];
  }
};

struct Tensor {
  double xx, xy, yy;
};

inline std::vector<Tensor> structure_tensor(const DenseImage& img, int radius) {
  std::vector<double> gx(img.v.size()), gy(img.v.size());
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const double dx = (img.at(x + 1, y - 1) + 2 * img.at(x + 1, y) + img.at(x + 1, y + 1)) -
                        (img.at(x - 1, y - 1) + 2 * img.at(x - 1, y) + img.at(x - 1, y + 1));
      const double dy = (img.at(x - 1, y + 1) + 2 * img.at(x, y + 1) + img.at(x + 1, y + 1)) -
                        (img.at(x - 1, y - 1) + 2 * img.at(x, y - 1) + img.at(x + 1, y - 1));
      gx[static_cast<std::size_t>(y) * img.w + x] = dx / 8.0;
      gy[static_cast<std::size_t>(y) * img.w + x] = dy / 8.0;
    }
  }
  const auto g = [&](const std::vector<double>& a, int x, int y) {
    x = std::clamp(x, 0, img.w - 1);
    y = std::clamp(y, 0, img.h - 1);
    return a[static_cast<std::size_t>(y) * img.w + x];
  };
  std::vector<Tensor> out(img.v.size());
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      Tensor t{0, 0, 0};
      for (int j = -radius; j <= radius; ++j) {
        for (int i = -radius; i <= radius; ++i) {
          const double a = g(gx, x + i, y + j), b = g(gy, x + i, y + j);
          t.xx += a * a;
          t.xy += a * b;
          t.yy += b * b;
        }
      }
      out[static_cast<std::size_t>(y) * img.w + x] = t;
    }
  }
  return out;
}

inline std::vector<double> harris(const DenseImage& img, int block_size, double k) {
  const auto st = structure_tensor(img, block_size / 2);
  std::vector<double> r(st.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    const double tr = st[i].xx + st[i].yy;
    r[i] = st[i].xx * st[i].yy - st[i].xy * st[i].xy - k * tr * tr;
  }
  return r;
}

inline double min_eigen(const Tensor& t) {
  const double half_tr = 0.5 * (t.xx + t.yy);
  const double d = std::sqrt(0.25 * (t.xx - t.yy) * (t.xx - t.yy) + t.xy * t.xy);
  return half_tr - d;
}

/// Strongest response within `radius` of (x, y).
inline std::pair<int, int> argmax_near(const std::vector<double>& r, int w, int h, double x, double y, int radius) {
  int bx = -1, by = -1;
  double best = -1e300;
  for (int j = static_cast<int>(std::round(y)) - radius; j <= static_cast<int>(std::round(y)) + radius; ++j) {
    for (int i = static_cast<int>(std::round(x)) - radius; i <= static_cast<int>(std::round(x)) + radius; ++i) {
      if (i < 0 || j < 0 || i >= w || j >= h) continue;
      const double v = r[static_cast<std::size_t>(j) * w + i];
      if (v > best) {
        best = v;
        bx = i;
        by = j;
      }
    }
  }
  return {bx, by};
}

}  // namespace oracle
