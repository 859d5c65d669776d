#pragma once

#include <vector>

#include "dofvo/image.hpp"

namespace dofvo {

struct Feature {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

/// Corner list ordered by non-increasing score.
struct FeatureSet {
  std::vector<Feature> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct HarrisConfig {
  int block_size = 3;
  double k = 0.04;
  int max_features = 500;
  double quality = 0.01;
  double min_distance = 8.0;
  int border = 5;
};

struct ShiTomasiConfig {
  int patch_radius = 3;
  double quality = 0.01;
};

/// Harris corner response det(M) - k trace(M)^2 with M the block-summed
/// structure tensor of 3x3 Sobel gradients. Row-major, same size as `img`.
std::vector<double> harris_response(const GrayImage& img, const HarrisConfig& cfg);

/// Local maxima of the Harris response above `quality * max`, thinned greedily
/// by `min_distance` and refined to sub-pixel precision.
FeatureSet harris_corners(const GrayImage& img, const HarrisConfig& cfg = {});

/// Rescores by the structure tensor's smaller eigenvalue over a patch and drops
/// features below `quality * max`.
FeatureSet shi_tomasi_rescore(const GrayImage& img, const FeatureSet& features, const ShiTomasiConfig& cfg = {});

}  // namespace dofvo
