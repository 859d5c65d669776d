#pragma once

#include <string>

#include "dofvo/epipolar.hpp"
#include "dofvo/features.hpp"
#include "dofvo/optical_flow.hpp"
#include "dofvo/se3.hpp"

namespace dofvo {

enum class GeometryMode { Essential, Fundamental };

const char* to_string(GeometryMode m);
GeometryMode parse_geometry_mode(const std::string& s);

struct FrontendConfig {
  HarrisConfig harris;
  ShiTomasiConfig shi_tomasi;
  FlowConfig flow;
  RansacConfig ransac;
  GeometryMode mode = GeometryMode::Essential;
  /// Median track displacement below which a pair is reported as low parallax.
  double min_parallax_px = 0.5;
};

struct StageTimes {
  double harris_us = 0.0;
  double shi_tomasi_us = 0.0;
  double track_us = 0.0;
  double estimate_us = 0.0;
  double recover_us = 0.0;
  double total_us = 0.0;
};

struct PairDiagnostics {
  std::size_t features = 0;
  std::size_t tracked = 0;
  std::size_t inliers = 0;
  double median_flow_px = 0.0;
  StageTimes times;
  std::string failure_reason;
};

/// Frame-to-frame motion from the classical chain. On failure `pose` is the
/// identity and `failed` is set; the caller keeps going.
struct PairResult {
  DoFVector pose;  // translation is unit-length (or zero on failure)
  bool failed = false;
  bool low_parallax = false;
  RecoveredPose recovered;
  PairDiagnostics diagnostics;
};

PairResult process_pair(const GrayImage& img_a, const GrayImage& img_b, const CameraIntrinsics& k,
                        const FrontendConfig& cfg = {});

/// Rescales the unit-direction translation by the ground-truth step length.
DoFVector apply_gt_scale(const DoFVector& raw, const DoFVector& gt);

}  // namespace dofvo
