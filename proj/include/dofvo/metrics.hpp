#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dofvo/euroc_io.hpp"
#include "dofvo/se3.hpp"

namespace dofvo {

struct StampedPose {
  Nanoseconds timestamp = 0;
  Transform pose;
};

struct Trajectory {
  std::vector<StampedPose> poses;

  std::size_t size() const { return poses.size(); }
  /// Throws data_error unless timestamps strictly increase and there are >= 2 poses.
  void validate() const;
};

/// Relative pose error, RMSE over frame pairs. Translation in meters, rotation in radians.
struct RpeReport {
  double trans_x = 0.0;
  double trans_y = 0.0;
  double trans_z = 0.0;
  double trans = 0.0;  // RMSE over all 3N translation components
  double rot_rx = 0.0;
  double rot_ry = 0.0;
  double rot_rz = 0.0;
  std::size_t pairs = 0;
  std::size_t excluded = 0;
};

/// Absolute trajectory error, per-axis RMSE over poses; `mean` is the mean of the three.
struct AteReport {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double mean = 0.0;
  std::size_t poses = 0;
};

/// Folds `rels` from `start`. `timestamps` carries rels.size() + 1 stamps, or
/// is empty to use 0, 1, 2, ... The rotation is re-orthonormalized every 100 steps.
Trajectory chain_relative(const Transform& start, const std::vector<DoFVector>& rels,
                          const std::vector<Nanoseconds>& timestamps = {});

/// `failed` (optional, one flag per pair) excludes pairs from the statistics.
RpeReport compute_rpe(const std::vector<DoFVector>& est_rels, const std::vector<DoFVector>& gt_rels,
                      std::span<const std::uint8_t> failed = {});

AteReport compute_ate(const Trajectory& est, const Trajectory& gt, bool align = true);

/// Rigid transform minimizing sum |gt_i - (R est_i + t)|^2 over positions.
Transform align_positions(const Trajectory& est, const Trajectory& gt);

double rmse(std::span<const double> values);

enum class AngleUnits { Radians, Degrees };
AngleUnits parse_angle_units(const std::string& s);

inline constexpr const char* kRpeColumns[] = {"RPE Trans. X", "RPE Trans. Y", "RPE Trans. Z", "RPE Trans.",
                                             "RPE Rot. RX",  "RPE Rot. RY",  "RPE Rot. RZ"};
inline constexpr const char* kAteColumns[] = {"ATE Trans. X", "ATE Trans. Y", "ATE Trans. Z", "Mean ATE"};

/// One table row; a missing report renders as NaN markers.
struct AblationRow {
  std::string label;
  std::optional<RpeReport> rpe;
  std::optional<AteReport> ate;
};

struct AblationTables {
  std::string rpe_csv;
  std::string rpe_text;
  std::string ate_csv;
  std::string ate_text;
};

/// CSV and aligned-text tables with 4 decimals, rows in the given order.
AblationTables emit_ablation_table(const std::vector<AblationRow>& rows, AngleUnits units = AngleUnits::Radians,
                                   const std::string& label_header = "Activation");

}  // namespace dofvo
