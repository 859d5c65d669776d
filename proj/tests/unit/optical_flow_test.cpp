#include <cmath>

#include <gtest/gtest.h>

#include "dofvo/features.hpp"
#include "dofvo/optical_flow.hpp"

using namespace dofvo;

namespace {

// Smooth blobby texture, evaluated analytically so shifted copies are exact.
double texture(double x, double y) {
  double v = 0.3;
  for (int i = 0; i < 12; ++i) {
    const double cx = 20.0 + 23.0 * (i % 4) + 3.0 * i, cy = 18.0 + 27.0 * (i / 4);
    const double s = 3.0 + (i % 3);
    v += 0.5 * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
  }
  return std::min(v, 1.0);
}

GrayImage render(double dx, double dy) {
  GrayImage img(128, 96);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 128; ++x) img(x, y) = texture(x - dx, y - dy);
  return img;
}

FeatureSet corners(const GrayImage& img) {
  HarrisConfig cfg;
  cfg.border = 12;
  return harris_corners(img, cfg);
}

}  // namespace

TEST(Flow, IdenticalImagesGiveZeroFlow) {
  const GrayImage a = render(0, 0);
  const FeatureSet fs = corners(a);
  ASSERT_GE(fs.size(), 5u);
  const Correspondences c = track_features(a, a, fs);
  ASSERT_EQ(c.size(), fs.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT((c.b[i] - c.a[i]).norm(), 1e-3);
}

TEST(Flow, RecoversKnownShift) {
  const GrayImage a = render(0, 0), b = render(3, 0);
  const FeatureSet fs = corners(a);
  const TrackResult r = track_features_detailed(a, b, fs);
  ASSERT_EQ(r.status.size(), fs.size());
  ASSERT_GE(r.tracked.size(), fs.size() / 2);
  for (std::size_t i = 0; i < r.tracked.size(); ++i) {
    EXPECT_NEAR(r.tracked.b[i].x() - r.tracked.a[i].x(), 3.0, 0.1);
    EXPECT_NEAR(r.tracked.b[i].y() - r.tracked.a[i].y(), 0.0, 0.1);
  }
}

TEST(Flow, DiagonalSubpixelShift) {
  const GrayImage a = render(0, 0), b = render(1.6, -2.3);
  const Correspondences c = track_features(a, b, corners(a));
  ASSERT_GE(c.size(), 3u);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT((c.b[i] - c.a[i] - Vec2(1.6, -2.3)).norm(), 0.1);
}

TEST(Flow, SourceIndexesInputFeatures) {
  const GrayImage a = render(0, 0), b = render(2, 1);
  const FeatureSet fs = corners(a);
  const Correspondences c = track_features(a, b, fs);
  for (std::size_t i = 0; i < c.size(); ++i) {
    ASSERT_LT(c.source[i], fs.size());
    EXPECT_EQ(c.a[i], Vec2(fs.points[c.source[i]].x, fs.points[c.source[i]].y));
  }
}

TEST(Flow, ConstantSecondImageInvalidatesAll) {
  const GrayImage a = render(0, 0);
  const FeatureSet fs = corners(a);
  const TrackResult r = track_features_detailed(a, GrayImage(128, 96, 0.5), fs);
  EXPECT_EQ(r.tracked.size(), 0u);
  for (auto s : r.status) EXPECT_NE(s, TrackStatus::Ok);
}

TEST(Flow, DimensionMismatchThrows) {
  const GrayImage a = render(0, 0);
  try {
    track_features(a, GrayImage(64, 64), corners(a));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Usage);
  }
}

TEST(Flow, EmptyFeatureSet) {
  const GrayImage a = render(0, 0);
  EXPECT_EQ(track_features(a, a, FeatureSet{}).size(), 0u);
}
