#include "dofvo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace dofvo {

namespace {

constexpr std::size_t kReorthonormalizeEvery = 100;

std::string fixed4(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string render_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "  ";
      const std::size_t pad = width[c] - cells[c].size();
      if (c == 0) {
        out << cells[c] << std::string(pad, ' ');
      } else {
        out << std::string(pad, ' ') << cells[c];
      }
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << cells[c];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

}  // namespace

void Trajectory::validate() const {
  if (poses.size() < 2) throw data_error("trajectory needs at least 2 poses");
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if (poses[i].timestamp <= poses[i - 1].timestamp) {
      throw data_error("trajectory timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
}

Trajectory chain_relative(const Transform& start, const std::vector<DoFVector>& rels,
                          const std::vector<Nanoseconds>& timestamps) {
  if (!timestamps.empty() && timestamps.size() != rels.size() + 1) {
    throw usage_error("chain_relative: need rels.size() + 1 timestamps");
  }
  const auto stamp = [&](std::size_t i) {
    return timestamps.empty() ? static_cast<Nanoseconds>(i) : timestamps[i];
  };
  Trajectory out;
  out.poses.reserve(rels.size() + 1);
  out.poses.push_back({stamp(0), start});
  Transform pose = start;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    pose = compose(pose, dof_to_transform(rels[i]));
    if ((i + 1) % kReorthonormalizeEvery == 0) pose.rotation = orthonormalize(pose.rotation);
    out.poses.push_back({stamp(i + 1), pose});
  }
  return out;
}

double rmse(std::span<const double> values) {
  if (values.empty()) throw usage_error("rmse of an empty list");
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

RpeReport compute_rpe(const std::vector<DoFVector>& est_rels, const std::vector<DoFVector>& gt_rels,
                      std::span<const std::uint8_t> failed) {
  if (est_rels.size() != gt_rels.size()) {
    throw data_error("compute_rpe: " + std::to_string(est_rels.size()) + " estimates vs " +
                     std::to_string(gt_rels.size()) + " ground-truth pairs");
  }
  if (!failed.empty() && failed.size() != est_rels.size()) throw usage_error("compute_rpe: failure flags misaligned");
  std::vector<double> ex, ey, ez, erx, ery, erz, pooled;
  RpeReport rep;
  for (std::size_t i = 0; i < est_rels.size(); ++i) {
    if (!failed.empty() && failed[i]) {
      ++rep.excluded;
      continue;
    }
    const Transform delta = relative_pose(dof_to_transform(gt_rels[i]), dof_to_transform(est_rels[i]));
    const EulerAngles e = rotation_to_euler(delta.rotation);
    ex.push_back(delta.translation.x());
    ey.push_back(delta.translation.y());
    ez.push_back(delta.translation.z());
    erx.push_back(e.rx);
    ery.push_back(e.ry);
    erz.push_back(e.rz);
  }
  if (ex.empty()) throw data_error("compute_rpe: no usable pairs");
  pooled.reserve(3 * ex.size());
  pooled.insert(pooled.end(), ex.begin(), ex.end());
  pooled.insert(pooled.end(), ey.begin(), ey.end());
  pooled.insert(pooled.end(), ez.begin(), ez.end());
  rep.trans_x = rmse(ex);
  rep.trans_y = rmse(ey);
  rep.trans_z = rmse(ez);
  rep.trans = rmse(pooled);
  rep.rot_rx = rmse(erx);
  rep.rot_ry = rmse(ery);
  rep.rot_rz = rmse(erz);
  rep.pairs = ex.size();
  return rep;
}

Transform align_positions(const Trajectory& est, const Trajectory& gt) {
  const std::size_t n = est.size();
  Vec3 mu_e = Vec3::Zero(), mu_g = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_e += est.poses[i].pose.translation;
    mu_g += gt.poses[i].pose.translation;
  }
  mu_e /= static_cast<double>(n);
  mu_g /= static_cast<double>(n);
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (est.poses[i].pose.translation - mu_e) * (gt.poses[i].pose.translation - mu_g).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 d(1.0, 1.0, (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  const Mat3 r = v * d.asDiagonal() * u.transpose();
  return {r, mu_g - r * mu_e};
}

AteReport compute_ate(const Trajectory& est, const Trajectory& gt, bool align) {
  if (est.size() < 2 || gt.size() < 2) throw data_error("compute_ate: need at least 2 poses");
  if (est.size() != gt.size()) {
    throw data_error("compute_ate: " + std::to_string(est.size()) + " estimated vs " + std::to_string(gt.size()) +
                     " ground-truth poses");
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est.poses[i].timestamp != gt.poses[i].timestamp) {
      throw data_error("compute_ate: misaligned timestamps at index " + std::to_string(i));
    }
  }
  const Transform a = align ? align_positions(est, gt) : Transform::identity();
  std::vector<double> ex, ey, ez;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Vec3 err = gt.poses[i].pose.translation - a.apply(est.poses[i].pose.translation);
    ex.push_back(err.x());
    ey.push_back(err.y());
    ez.push_back(err.z());
  }
  AteReport rep;
  rep.x = rmse(ex);
  rep.y = rmse(ey);
  rep.z = rmse(ez);
  rep.mean = (rep.x + rep.y + rep.z) / 3.0;
  rep.poses = est.size();
  return rep;
}

AngleUnits parse_angle_units(const std::string& s) {
  if (s == "rad") return AngleUnits::Radians;
  if (s == "deg") return AngleUnits::Degrees;
  throw usage_error("units must be 'deg' or 'rad', got '" + s + "'");
}

AblationTables emit_ablation_table(const std::vector<AblationRow>& rows, AngleUnits units,
                                   const std::string& label_header) {
  const double k = units == AngleUnits::Degrees ? 180.0 / std::numbers::pi : 1.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> rpe_header{label_header}, ate_header{label_header};
  for (const char* c : kRpeColumns) rpe_header.emplace_back(c);
  for (const char* c : kAteColumns) ate_header.emplace_back(c);

  std::vector<std::vector<std::string>> rpe_rows, ate_rows;
  for (const auto& row : rows) {
    const RpeReport r = row.rpe.value_or(RpeReport{nan, nan, nan, nan, nan, nan, nan, 0, 0});
    rpe_rows.push_back({row.label, fixed4(r.trans_x), fixed4(r.trans_y), fixed4(r.trans_z), fixed4(r.trans),
                        fixed4(r.rot_rx * k), fixed4(r.rot_ry * k), fixed4(r.rot_rz * k)});
    const AteReport a = row.ate.value_or(AteReport{nan, nan, nan, nan, 0});
    ate_rows.push_back({row.label, fixed4(a.x), fixed4(a.y), fixed4(a.z), fixed4(a.mean)});
  }
  return {render_csv(rpe_header, rpe_rows), render_text(rpe_header, rpe_rows), render_csv(ate_header, ate_rows),
          render_text(ate_header, ate_rows)};
}

}  // namespace dofvo
