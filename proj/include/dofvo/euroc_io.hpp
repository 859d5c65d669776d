#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dofvo/error.hpp"
#include "dofvo/se3.hpp"

namespace dofvo {

using Nanoseconds = std::int64_t;

struct FrameRecord {
  Nanoseconds timestamp = 0;
  std::string image_filename;
};

struct GroundTruthRecord {
  Nanoseconds timestamp = 0;
  Vec3 position = Vec3::Zero();
  Quaternion orientation;

  Transform pose() const;
};

struct GroundTruthLoad {
  std::vector<GroundTruthRecord> records;
  /// Rows whose quaternion norm deviated from 1 by more than 1e-3 before normalization.
  std::size_t normalization_warnings = 0;
};

/// Ground truth interpolated between two consecutive camera frames.
struct AssociatedPair {
  FrameRecord frame_a;
  FrameRecord frame_b;
  Transform gt_relative;
  DoFVector gt_dof;
};

struct PairBuild {
  std::vector<AssociatedPair> pairs;
  std::size_t dropped = 0;
};

class NonMonotonicError : public Error {
 public:
  NonMonotonicError(const std::string& what, std::size_t line)
      : Error(ErrorKind::Data, what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class OutOfRangeError : public Error {
 public:
  OutOfRangeError(const std::string& what, Nanoseconds first, Nanoseconds last)
      : Error(ErrorKind::Data, what), first_(first), last_(last) {}
  Nanoseconds first() const { return first_; }
  Nanoseconds last() const { return last_; }

 private:
  Nanoseconds first_;
  Nanoseconds last_;
};

class EmptyOverlapError : public Error {
 public:
  explicit EmptyOverlapError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Paths of one ASL-format sequence: `<root>/mav0/<camera>/...`.
struct EurocLayout {
  std::filesystem::path root;
  std::string camera = "cam0";

  std::filesystem::path camera_index() const { return root / "mav0" / camera / "data.csv"; }
  std::filesystem::path image_dir() const { return root / "mav0" / camera / "data"; }
  std::filesystem::path groundtruth() const { return root / "mav0" / "state_groundtruth_estimate0" / "data.csv"; }
  std::filesystem::path image_path(const FrameRecord& f) const { return image_dir() / f.image_filename; }
};

std::vector<FrameRecord> load_camera_index(const std::filesystem::path& path);
GroundTruthLoad load_groundtruth(const std::filesystem::path& path);

/// Linear position / slerp orientation between the bracketing records.
Transform interpolate_gt(const std::vector<GroundTruthRecord>& gt, Nanoseconds t);

PairBuild build_pairs(const std::vector<FrameRecord>& frames, const std::vector<GroundTruthRecord>& gt,
                      Nanoseconds max_extrapolation = 0);

/// `timestamp_a_ns,timestamp_b_ns,tx,ty,tz,rx,ry,rz`, 9 significant digits.
void write_relative_gt_csv(const std::filesystem::path& path, const std::vector<AssociatedPair>& pairs);

struct RelativeGtRow {
  Nanoseconds timestamp_a = 0;
  Nanoseconds timestamp_b = 0;
  DoFVector dof;
};

std::vector<RelativeGtRow> read_relative_gt_csv(const std::filesystem::path& path);

/// Writes EuRoC-style CSVs; used for fixtures.
void write_camera_index(const std::filesystem::path& path, const std::vector<FrameRecord>& frames);
void write_groundtruth(const std::filesystem::path& path, const std::vector<GroundTruthRecord>& gt);

Quaternion slerp(const Quaternion& a, const Quaternion& b, double u);

}  // namespace dofvo
