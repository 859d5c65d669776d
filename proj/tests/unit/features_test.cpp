#include <cmath>

#include <gtest/gtest.h>

#include "dofvo/features.hpp"
#include "oracles/harris_oracle.hpp"

using namespace dofvo;

namespace {

GrayImage square(int size, int x0, int y0, int side) {
  GrayImage img(size, size, 0.0);
  for (int y = y0; y < y0 + side; ++y)
    for (int x = x0; x < x0 + side; ++x) img(x, y) = 1.0;
  return img;
}

GrayImage checkerboard(int size, int cell) {
  GrayImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) img(x, y) = ((x / cell + y / cell) % 2) ? 0.9 : 0.1;
  return img;
}

oracle::DenseImage dense(const GrayImage& img) { return {img.width(), img.height(), img.pixels()}; }

double nearest(const FeatureSet& fs, double x, double y) {
  double best = 1e300;
  for (const auto& f : fs.points) best = std::min(best, std::hypot(f.x - x, f.y - y));
  return best;
}

}  // namespace

TEST(Harris, ConstantImageHasNoCorners) {
  EXPECT_TRUE(harris_corners(GrayImage(64, 64, 0.5)).empty());
}

TEST(Harris, ResponseMatchesDenseOracle) {
  const GrayImage img = checkerboard(48, 6);
  const HarrisConfig cfg;
  const auto r = harris_response(img, cfg);
  const auto o = oracle::harris(dense(img), cfg.block_size, cfg.k);
  ASSERT_EQ(r.size(), o.size());
  for (std::size_t i = 0; i < r.size(); ++i) ASSERT_NEAR(r[i], o[i], 1e-12) << i;
}

TEST(Harris, SquareCornersNearOracleMaxima) {
  const GrayImage img = square(64, 28, 28, 8);
  HarrisConfig cfg;
  cfg.min_distance = 4.0;
  const FeatureSet fs = harris_corners(img, cfg);
  ASSERT_EQ(fs.size(), 4u);
  const auto r = oracle::harris(dense(img), cfg.block_size, cfg.k);
  // geometric corners sit on pixel boundaries 27.5 and 35.5
  for (double cy : {27.5, 35.5}) {
    for (double cx : {27.5, 35.5}) {
      const auto [ox, oy] = oracle::argmax_near(r, 64, 64, cx, cy, 2);
      EXPECT_LE(nearest(fs, ox, oy), 1.5) << cx << "," << cy;
      EXPECT_LE(nearest(fs, cx, cy), 1.5);
    }
  }
}

TEST(Harris, ScoresNonIncreasing) {
  const FeatureSet fs = harris_corners(checkerboard(96, 8));
  for (std::size_t i = 1; i < fs.size(); ++i) EXPECT_GE(fs.points[i - 1].score, fs.points[i].score);
}

TEST(Harris, CheckerboardYieldsManyCorners) {
  EXPECT_GE(harris_corners(checkerboard(96, 8)).size(), 40u);
}

TEST(Harris, MaxFeaturesAndSpacingRespected) {
  HarrisConfig cfg;
  cfg.max_features = 10;
  const FeatureSet fs = harris_corners(checkerboard(96, 8), cfg);
  EXPECT_EQ(fs.size(), 10u);
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j)
      EXPECT_GE(std::hypot(fs.points[i].x - fs.points[j].x, fs.points[i].y - fs.points[j].y), cfg.min_distance);
}

TEST(Harris, IntensityScalingMovesNothing) {
  GrayImage img = checkerboard(96, 8);
  const FeatureSet a = harris_corners(img);
  for (double& v : img.pixels()) v *= 0.5;
  const FeatureSet b = harris_corners(img);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& f : a.points) EXPECT_LT(nearest(b, f.x, f.y), 0.5);
}

TEST(ShiTomasi, KeepsCornersDropsEdgeMidpoints) {
  // checkerboard on the left, a single horizontal edge on the right
  const GrayImage board = checkerboard(96, 8);
  GrayImage comp(160, 96, 0.1);
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 80; ++x) comp(x, y) = board(x, y);
    for (int x = 80; x < 160; ++x) comp(x, y) = y >= 48 ? 0.9 : 0.1;
  }
  FeatureSet in;
  for (const auto& f : harris_corners(comp).points)
    if (f.x < 72) in.points.push_back(f);
  const std::size_t corners = in.size();
  ASSERT_GE(corners, 30u);
  for (int i = 0; i < 10; ++i) in.points.push_back({90.0 + 6.0 * i, 47.5, 0.0});
  const FeatureSet out = shi_tomasi_rescore(comp, in);
  EXPECT_EQ(out.size(), corners);
  for (const auto& f : out.points) EXPECT_LT(f.x, 72.0);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out.points[i - 1].score, out.points[i].score);
}

TEST(ShiTomasi, ScoreIsMinEigenOfPatchTensor) {
  const GrayImage img = checkerboard(64, 8);
  FeatureSet in;
  in.points.push_back({23.4, 23.4, 0.0});
  in.points.push_back({40.2, 31.6, 0.0});
  ShiTomasiConfig cfg;
  cfg.quality = 0.0;
  const FeatureSet out = shi_tomasi_rescore(img, in, cfg);
  ASSERT_EQ(out.size(), 2u);
  const auto st = oracle::structure_tensor(dense(img), cfg.patch_radius);
  for (const auto& f : out.points) {
    const int x = static_cast<int>(std::lround(f.x)), y = static_cast<int>(std::lround(f.y));
    EXPECT_NEAR(f.score, oracle::min_eigen(st[y * 64 + x]), 1e-12);
  }
}

TEST(ShiTomasi, EmptyInput) { EXPECT_TRUE(shi_tomasi_rescore(GrayImage(64, 64), FeatureSet{}).empty()); }
