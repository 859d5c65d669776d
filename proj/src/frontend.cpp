#include "dofvo/frontend.hpp"

#include <algorithm>
#include <chrono>

namespace dofvo {

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

}  // namespace

const char* to_string(GeometryMode m) { return m == GeometryMode::Essential ? "essential" : "fundamental"; }

GeometryMode parse_geometry_mode(const std::string& s) {
  if (s == "essential") return GeometryMode::Essential;
  if (s == "fundamental") return GeometryMode::Fundamental;
  throw usage_error("geometry mode must be 'essential' or 'fundamental', got '" + s + "'");
}

PairResult process_pair(const GrayImage& img_a, const GrayImage& img_b, const CameraIntrinsics& k,
                        const FrontendConfig& cfg) {
  PairResult out;
  PairDiagnostics& diag = out.diagnostics;
  const auto total_start = Clock::now();
  const auto fail = [&](std::string reason) {
    out.failed = true;
    out.pose = DoFVector{};
    diag.failure_reason = std::move(reason);
    diag.times.total_us = micros_since(total_start);
    return out;
  };

  auto t0 = Clock::now();
  const FeatureSet corners = harris_corners(img_a, cfg.harris);
  diag.times.harris_us = micros_since(t0);

  t0 = Clock::now();
  const FeatureSet features = shi_tomasi_rescore(img_a, corners, cfg.shi_tomasi);
  diag.times.shi_tomasi_us = micros_since(t0);
  diag.features = features.size();

  t0 = Clock::now();
  const Correspondences tracks = track_features(img_a, img_b, features, cfg.flow);
  diag.times.track_us = micros_since(t0);
  diag.tracked = tracks.size();
  if (tracks.size() < 8) return fail("tracking collapsed: " + std::to_string(tracks.size()) + " tracks");

  std::vector<double> flow(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) flow[i] = (tracks.b[i] - tracks.a[i]).norm();
  std::nth_element(flow.begin(), flow.begin() + static_cast<std::ptrdiff_t>(flow.size() / 2), flow.end());
  diag.median_flow_px = flow[flow.size() / 2];
  if (diag.median_flow_px < cfg.min_parallax_px) {
    out.low_parallax = true;
    return fail("low parallax");
  }

  try {
    t0 = Clock::now();
    EssentialMatrix e;
    if (cfg.mode == GeometryMode::Essential) {
      e = estimate_essential(tracks, k, cfg.ransac);
    } else {
      e = essential_from_fundamental(estimate_fundamental(tracks, cfg.ransac), k);
    }
    diag.times.estimate_us = micros_since(t0);
    diag.inliers = e.inlier_count;

    t0 = Clock::now();
    out.recovered = recover_pose(e, tracks, k);
    diag.times.recover_us = micros_since(t0);
  } catch (const Error& err) {
    return fail(err.what());
  }

  Transform motion = out.recovered.camera_motion();
  out.pose = transform_to_dof(motion);
  diag.times.total_us = micros_since(total_start);
  return out;
}

DoFVector apply_gt_scale(const DoFVector& raw, const DoFVector& gt) {
  const double step = gt.translation().norm();
  DoFVector out = raw;
  for (std::size_t i = 0; i < 3; ++i) out[i] = raw[i] * step;
  return out;
}

}  // namespace dofvo
