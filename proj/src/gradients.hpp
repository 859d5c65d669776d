#pragma once

// Internal image-filtering helpers shared by the detector and the tracker.

#include <vector>

#include "dofvo/image.hpp"

namespace dofvo {

struct Gradients {
  std::vector<double> x;
  std::vector<double> y;
};

/// 3x3 Sobel derivatives scaled by 1/8 (units: intensity per pixel), border replicated.
Gradients sobel_gradients(const GrayImage& img);

/// Sum over the (2r+1)^2 window around each pixel, border replicated.
std::vector<double> box_sum(const std::vector<double>& src, int w, int h, int r);

/// 5-tap binomial blur followed by 2x decimation.
GrayImage pyr_down(const GrayImage& img);

}  // namespace dofvo
