#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "dofvo/features.hpp"
#include "dofvo/image.hpp"

namespace dofvo {

using Vec2 = Eigen::Vector2d;

struct FlowConfig {
  int window = 21;  // odd, full width
  int levels = 3;   // pyramid levels including the base image
  int max_iterations = 30;
  double epsilon = 0.01;       // px, per-iteration update norm that counts as converged
  double max_residual = 0.1;   // mean absolute intensity difference over the window
  double min_eigen = 1e-4;     // normalized structure-tensor floor
};

/// Point pairs that survived tracking. `source` indexes the input FeatureSet.
struct Correspondences {
  std::vector<Vec2> a;
  std::vector<Vec2> b;
  std::vector<std::size_t> source;

  std::size_t size() const { return a.size(); }
  void push(const Vec2& pa, const Vec2& pb, std::size_t src = 0) {
    a.push_back(pa);
    b.push_back(pb);
    source.push_back(src);
  }
};

enum class TrackStatus { Ok, OutOfBounds, Untextured, NotConverged, HighResidual };

struct TrackResult {
  Correspondences tracked;
  std::vector<TrackStatus> status;  // one per input feature
};

/// Pyramidal iterative Lucas-Kanade. Throws usage_error on dimension mismatch.
TrackResult track_features_detailed(const GrayImage& prev, const GrayImage& curr, const FeatureSet& features,
                                    const FlowConfig& cfg = {});

inline Correspondences track_features(const GrayImage& prev, const GrayImage& curr, const FeatureSet& features,
                                      const FlowConfig& cfg = {}) {
  return track_features_detailed(prev, curr, features, cfg).tracked;
}

}  // namespace dofvo
