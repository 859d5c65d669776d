#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dofvo/euroc_io.hpp"
#include "dofvo/image.hpp"
#include "dofvo/metrics.hpp"
#include "support/scratch_dir.hpp"

using namespace dofvo;
using testsupport::ScratchDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

GroundTruthRecord record(Nanoseconds t, Vec3 p, const Mat3& r = Mat3::Identity()) {
  GroundTruthRecord g;
  g.timestamp = t;
  g.position = p;
  g.orientation = rotation_to_quat(r);
  return g;
}

/// Straight line: 0.1 m per 50 ms along x, identity orientation.
std::vector<GroundTruthRecord> straight_line(int n) {
  std::vector<GroundTruthRecord> gt;
  for (int i = 0; i < n; ++i) gt.push_back(record(1000 + 50 * i, {0.1 * i, 0, 0}));
  return gt;
}

std::vector<FrameRecord> frames_at(const std::vector<Nanoseconds>& ts) {
  std::vector<FrameRecord> f;
  for (auto t : ts) f.push_back({t, std::to_string(t) + ".png"});
  return f;
}

}  // namespace

TEST(CameraIndex, TwoRowsInOrder) {
  ScratchDir dir("cam_two");
  write_file(dir / "data.csv", "#timestamp [ns],filename\n100,100.png\n200,200.png\n");
  const auto f = load_camera_index(dir / "data.csv");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].timestamp, 100);
  EXPECT_EQ(f[1].image_filename, "200.png");
}

TEST(CameraIndex, DuplicateTimestampNamesLine) {
  ScratchDir dir("cam_dup");
  write_file(dir / "data.csv", "#timestamp [ns],filename\n100,a.png\n200,b.png\n200,c.png\n");
  try {
    load_camera_index(dir / "data.csv");
    FAIL() << "expected NonMonotonicError";
  } catch (const NonMonotonicError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find(":4"), std::string::npos) << e.what();
  }
}

TEST(CameraIndex, MalformedRowReportsLine) {
  ScratchDir dir("cam_bad");
  write_file(dir / "data.csv", "#timestamp [ns],filename\n100,a.png\nxyz,b.png\n");
  try {
    load_camera_index(dir / "data.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Data);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(CameraIndex, MissingFile) {
  try {
    load_camera_index("/nonexistent/data.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Data);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/data.csv"), std::string::npos);
  }
}

TEST(CameraIndex, SingleFrameRejected) {
  ScratchDir dir("cam_one");
  write_file(dir / "data.csv", "100,a.png\n");
  EXPECT_THROW(load_camera_index(dir / "data.csv"), Error);
}

TEST(CameraIndex, EurocSequenceWhenPresent) {
  const char* root = std::getenv("DOFVO_EUROC_ROOT");
  if (!root) GTEST_SKIP() << "DOFVO_EUROC_ROOT not set";
  const auto frames = load_camera_index(EurocLayout{root}.camera_index());
  // the V1_01_easy cam0 index holds 2912 rows
  if (std::string(root).find("V1_01") != std::string::npos) EXPECT_EQ(frames.size(), 2912u);
  EXPECT_GE(frames.size(), 2u);
}

TEST(GroundTruth, SingleRowUnitQuaternion) {
  ScratchDir dir("gt_one");
  write_file(dir / "gt.csv", "#timestamp,p_x,p_y,p_z,q_w,q_x,q_y,q_z\n5,1,2,3,2,0,0,0,9,9,9\n");
  const auto gt = load_groundtruth(dir / "gt.csv");
  ASSERT_EQ(gt.records.size(), 1u);
  EXPECT_DOUBLE_EQ(gt.records[0].orientation.w, 1.0);
  EXPECT_DOUBLE_EQ(gt.records[0].position.z(), 3.0);
  EXPECT_EQ(gt.normalization_warnings, 1u);
}

TEST(GroundTruth, ZeroQuaternionIsDegenerate) {
  ScratchDir dir("gt_zero");
  write_file(dir / "gt.csv", "5,1,2,3,0,0,0,0\n");
  EXPECT_THROW(load_groundtruth(dir / "gt.csv"), DegenerateQuaternionError);
}

TEST(GroundTruth, MissingColumns) {
  ScratchDir dir("gt_cols");
  write_file(dir / "gt.csv", "5,1,2,3,1,0,0\n");
  EXPECT_THROW(load_groundtruth(dir / "gt.csv"), Error);
}

TEST(GroundTruth, NonFinite) {
  ScratchDir dir("gt_nan");
  write_file(dir / "gt.csv", "5,1,nan,3,1,0,0,0\n");
  EXPECT_THROW(load_groundtruth(dir / "gt.csv"), Error);
}

TEST(GroundTruth, HundredRowRoundTrip) {
  ScratchDir dir("gt_round");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<GroundTruthRecord> gt;
  for (int i = 0; i < 100; ++i) {
    GroundTruthRecord r;
    r.timestamp = 1403715273262142976LL + 5'000'000LL * i;
    r.position = {n(rng), n(rng), n(rng)};
    r.orientation = normalized({n(rng), n(rng), n(rng), n(rng)});
    gt.push_back(r);
  }
  write_groundtruth(dir / "gt.csv", gt);
  const auto back = load_groundtruth(dir / "gt.csv");
  ASSERT_EQ(back.records.size(), gt.size());
  EXPECT_EQ(back.normalization_warnings, 0u);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    EXPECT_EQ(back.records[i].timestamp, gt[i].timestamp);
    EXPECT_EQ(back.records[i].position, gt[i].position);
    EXPECT_NEAR(back.records[i].orientation.w, gt[i].orientation.w, 1e-15);
    EXPECT_NEAR(back.records[i].orientation.x, gt[i].orientation.x, 1e-15);
    EXPECT_NEAR(back.records[i].orientation.y, gt[i].orientation.y, 1e-15);
    EXPECT_NEAR(back.records[i].orientation.z, gt[i].orientation.z, 1e-15);
  }
}

TEST(Interpolate, ExactTimestampReturnsRecord) {
  const auto gt = straight_line(5);
  const Transform t = interpolate_gt(gt, gt[2].timestamp);
  EXPECT_EQ(t.translation, gt[2].position);
}

TEST(Interpolate, LinearMidpoint) {
  const std::vector<GroundTruthRecord> gt{record(0, {0, 0, 0}), record(100, {2, 0, 0})};
  EXPECT_NEAR((interpolate_gt(gt, 50).translation - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Interpolate, SlerpMidpoint) {
  const std::vector<GroundTruthRecord> gt{record(0, {0, 0, 0}), record(100, {0, 0, 0}, rot_z(std::numbers::pi / 2))};
  const Mat3 r = interpolate_gt(gt, 50).rotation;
  EXPECT_LE((r - rot_z(std::numbers::pi / 4)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Interpolate, OutOfRangeCarriesWindow) {
  const auto gt = straight_line(3);
  try {
    interpolate_gt(gt, 5000);
    FAIL();
  } catch (const OutOfRangeError& e) {
    EXPECT_EQ(e.first(), 1000);
    EXPECT_EQ(e.last(), 1100);
  }
}

TEST(Interpolate, ContinuousAcrossOneNanosecond) {
  std::vector<GroundTruthRecord> gt;
  for (int i = 0; i < 10; ++i) gt.push_back(record(5'000'000LL * i, {std::sin(0.1 * i), 0.3 * i, 0}, rot_y(0.05 * i)));
  for (Nanoseconds t = 1'234'567; t < 40'000'000; t += 3'333'333) {
    EXPECT_LT((interpolate_gt(gt, t).translation - interpolate_gt(gt, t + 1).translation).norm(), 1e-6);
  }
}

TEST(BuildPairs, StraightLineSteps) {
  const auto gt = straight_line(10);
  std::vector<Nanoseconds> ts;
  for (const auto& g : gt) ts.push_back(g.timestamp);
  const PairBuild b = build_pairs(frames_at(ts), gt);
  ASSERT_EQ(b.pairs.size(), 9u);
  EXPECT_EQ(b.dropped, 0u);
  for (const auto& p : b.pairs) {
    EXPECT_NEAR(p.gt_dof[0], 0.1, 1e-12);
    for (std::size_t k = 1; k < 6; ++k) EXPECT_NEAR(p.gt_dof[k], 0.0, 1e-12);
    EXPECT_EQ(p.gt_dof, transform_to_dof(p.gt_relative));
  }
}

TEST(BuildPairs, SingleFrameIsEmptyOverlap) {
  EXPECT_THROW(build_pairs(frames_at({1000}), straight_line(3)), EmptyOverlapError);
}

TEST(BuildPairs, FramesBeforeCoverageIsEmptyOverlap) {
  EXPECT_THROW(build_pairs(frames_at({1, 2, 3}), straight_line(3)), EmptyOverlapError);
}

TEST(BuildPairs, OutsidePairsDroppedAndCounted) {
  const PairBuild b = build_pairs(frames_at({900, 1000, 1050, 1100, 1200}), straight_line(3));
  EXPECT_EQ(b.pairs.size(), 2u);
  EXPECT_EQ(b.dropped, 2u);
}

TEST(BuildPairs, ExtrapolationClampsToBoundary) {
  const PairBuild b = build_pairs(frames_at({990, 1050, 1110}), straight_line(3), 10);
  ASSERT_EQ(b.pairs.size(), 2u);
  EXPECT_NEAR(b.pairs[0].gt_dof[0], 0.1, 1e-12);
}

TEST(BuildPairs, ChainReproducesLastPose) {
  std::vector<GroundTruthRecord> gt;
  for (int i = 0; i < 400; ++i) {
    const double s = 0.005 * i;
    gt.push_back(record(5'000'000LL * i, {std::sin(s), std::cos(2 * s), s},
                        rot_z(0.3 * std::sin(s)) * rot_y(0.2 * s) * rot_x(0.1 * std::cos(s))));
  }
  std::vector<Nanoseconds> ts;
  for (Nanoseconds t = 3'000'000; t < 1'990'000'000; t += 50'000'000) ts.push_back(t);
  const PairBuild b = build_pairs(frames_at(ts), gt);
  std::vector<DoFVector> rels;
  for (const auto& p : b.pairs) rels.push_back(p.gt_dof);
  const Transform start = interpolate_gt(gt, ts.front());
  const Transform end = interpolate_gt(gt, ts.back());
  const Trajectory chained = chain_relative(start, rels);
  const Transform& last = chained.poses.back().pose;
  EXPECT_LT((last.translation - end.translation).norm(), 1e-6);
  EXPECT_LT(rotation_angle(last.rotation.transpose() * end.rotation), 1e-6);
}

TEST(RelativeGtCsv, HeaderAndPrecision) {
  ScratchDir dir("relgt");
  const auto gt = straight_line(3);
  const PairBuild b = build_pairs(frames_at({1000, 1050, 1100}), gt);
  write_relative_gt_csv(dir / "rel.csv", b.pairs);
  std::ifstream in(dir / "rel.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "timestamp_a_ns,timestamp_b_ns,tx,ty,tz,rx,ry,rz");
  const auto rows = read_relative_gt_csv(dir / "rel.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].timestamp_a, 1050);
  EXPECT_NEAR(rows[1].dof[0], 0.1, 1e-9);
}

TEST(LoadImage, BlackAndWhitePng) {
  ScratchDir dir("png");
  save_png(GrayImage(64, 64, 0.0), dir / "black.png");
  save_png(GrayImage(64, 64, 1.0), dir / "white.png");
  for (double v : load_image(dir / "black.png").pixels()) ASSERT_EQ(v, 0.0);
  for (double v : load_image(dir / "white.png").pixels()) ASSERT_EQ(v, 1.0);
}

TEST(LoadImage, BinaryPgmBytes) {
  ScratchDir dir("pgm");
  write_file(dir / "tiny.pgm", std::string("P5\n2 2\n255\n") + std::string{'\x00', '\x80', '\xff', '\x40'});
  const GrayImage img = load_image(dir / "tiny.pgm", {1});
  ASSERT_EQ(img.width(), 2);
  EXPECT_EQ(img.pixels(), (std::vector<double>{0.0, 128.0 / 255, 1.0, 64.0 / 255}));
}

TEST(LoadImage, MinimumDimensionGuard) {
  ScratchDir dir("pgm_small");
  write_file(dir / "tiny.pgm", std::string("P5\n2 2\n255\n") + std::string{'\x00', '\x80', '\xff', '\x40'});
  EXPECT_THROW(load_image(dir / "tiny.pgm"), Error);
}

TEST(LoadImage, UnsupportedFormat) {
  ScratchDir dir("bmp");
  write_file(dir / "x.bmp", "BM garbage");
  EXPECT_THROW(load_image(dir / "x.bmp"), Error);
}
