#include "dofvo/euroc_io.hpp"

#include <algorithm>
#include <cmath>

#include "dofvo/csv.hpp"

namespace dofvo {

namespace {

bool looks_numeric(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == '+');
}

}  // namespace

Transform GroundTruthRecord::pose() const { return {quat_to_rotation(orientation), position}; }

std::vector<FrameRecord> load_camera_index(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw data_error("camera index not found: " + path.string());
  auto rows = csv::read_rows(path);
  if (!rows.empty() && !looks_numeric(rows.front().fields.front())) rows.erase(rows.begin());
  std::vector<FrameRecord> frames;
  frames.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.fields.size() < 2 || row.fields[1].empty()) {
      throw data_error("malformed camera index row at " + path.string() + ":" + std::to_string(row.line));
    }
    FrameRecord f{csv::to_int64(row.fields[0], path, row.line), row.fields[1]};
    if (!frames.empty() && f.timestamp <= frames.back().timestamp) {
      throw NonMonotonicError("non-monotonic timestamp at " + path.string() + ":" + std::to_string(row.line),
                              row.line);
    }
    frames.push_back(std::move(f));
  }
  if (frames.size() < 2) throw data_error("camera index " + path.string() + " has fewer than 2 frames");
  return frames;
}

GroundTruthLoad load_groundtruth(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw data_error("ground truth not found: " + path.string());
  auto rows = csv::read_rows(path);
  if (!rows.empty() && !looks_numeric(rows.front().fields.front())) rows.erase(rows.begin());
  GroundTruthLoad out;
  out.records.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string at = path.string() + ":" + std::to_string(row.line);
    if (row.fields.size() < 8) throw data_error("ground truth row has fewer than 8 columns at " + at);
    GroundTruthRecord r;
    r.timestamp = csv::to_int64(row.fields[0], path, row.line);
    double v[7];
    for (int i = 0; i < 7; ++i) {
      v[i] = csv::to_double(row.fields[i + 1], path, row.line);
      if (!std::isfinite(v[i])) throw data_error("non-finite ground truth value at " + at);
    }
    r.position = {v[0], v[1], v[2]};
    const Quaternion raw{v[3], v[4], v[5], v[6]};
    const double n = raw.norm();
    if (!(n >= 1e-12)) {
      throw DegenerateQuaternionError(ErrorKind::Data, "degenerate quaternion at " + at);
    }
    if (std::abs(n - 1.0) > 1e-3) ++out.normalization_warnings;
    r.orientation = normalized(raw);
    if (!out.records.empty() && r.timestamp <= out.records.back().timestamp) {
      throw NonMonotonicError("non-monotonic ground truth timestamp at " + at, row.line);
    }
    out.records.push_back(r);
  }
  return out;
}

Quaternion slerp(const Quaternion& a, const Quaternion& b_in, double u) {
  Quaternion b = b_in;
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  if (dot < 0.0) {
    b = {-b.w, -b.x, -b.y, -b.z};
    dot = -dot;
  }
  double wa, wb;
  if (dot > 1.0 - 1e-12) {
    wa = 1.0 - u;
    wb = u;
  } else {
    const double theta = std::acos(std::min(dot, 1.0));
    const double s = std::sin(theta);
    wa = std::sin((1.0 - u) * theta) / s;
    wb = std::sin(u * theta) / s;
  }
  return normalized({wa * a.w + wb * b.w, wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z});
}

Transform interpolate_gt(const std::vector<GroundTruthRecord>& gt, Nanoseconds t) {
  if (gt.empty() || t < gt.front().timestamp || t > gt.back().timestamp) {
    const Nanoseconds first = gt.empty() ? 0 : gt.front().timestamp;
    const Nanoseconds last = gt.empty() ? 0 : gt.back().timestamp;
    throw OutOfRangeError("timestamp " + std::to_string(t) + " outside ground-truth coverage [" +
                              std::to_string(first) + ", " + std::to_string(last) + "]",
                          first, last);
  }
  const auto it = std::lower_bound(gt.begin(), gt.end(), t,
                                   [](const GroundTruthRecord& r, Nanoseconds v) { return r.timestamp < v; });
  if (it->timestamp == t) return it->pose();
  const GroundTruthRecord& hi = *it;
  const GroundTruthRecord& lo = *(it - 1);
  const double u = static_cast<double>(t - lo.timestamp) / static_cast<double>(hi.timestamp - lo.timestamp);
  Transform out;
  out.translation = (1.0 - u) * lo.position + u * hi.position;
  out.rotation = quat_to_rotation(slerp(lo.orientation, hi.orientation, u));
  return out;
}

PairBuild build_pairs(const std::vector<FrameRecord>& frames, const std::vector<GroundTruthRecord>& gt,
                      Nanoseconds max_extrapolation) {
  PairBuild out;
  if (frames.size() < 2 || gt.empty()) {
    throw EmptyOverlapError("no frame pairs overlap the ground truth (need >= 2 frames and non-empty ground truth)");
  }
  const Nanoseconds first = gt.front().timestamp;
  const Nanoseconds last = gt.back().timestamp;
  const auto covered = [&](Nanoseconds t) {
    return t >= first - max_extrapolation && t <= last + max_extrapolation;
  };
  const auto pose_at = [&](Nanoseconds t) { return interpolate_gt(gt, std::clamp(t, first, last)); };

  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    const FrameRecord& a = frames[i];
    const FrameRecord& b = frames[i + 1];
    if (!covered(a.timestamp) || !covered(b.timestamp)) {
      ++out.dropped;
      continue;
    }
    AssociatedPair p;
    p.frame_a = a;
    p.frame_b = b;
    p.gt_relative = relative_pose(pose_at(a.timestamp), pose_at(b.timestamp));
    p.gt_dof = transform_to_dof(p.gt_relative);
    out.pairs.push_back(std::move(p));
  }
  if (out.pairs.empty()) {
    throw EmptyOverlapError("no frame pairs overlap the ground truth (" + std::to_string(out.dropped) +
                            " dropped)");
  }
  return out;
}

void write_relative_gt_csv(const std::filesystem::path& path, const std::vector<AssociatedPair>& pairs) {
  auto out = csv::open_for_write(path);
  out << "timestamp_a_ns,timestamp_b_ns,tx,ty,tz,rx,ry,rz\n";
  for (const auto& p : pairs) {
    out << p.frame_a.timestamp << ',' << p.frame_b.timestamp;
    for (double v : p.gt_dof.values) out << ',' << csv::format_double(v, 9);
    out << '\n';
  }
}

std::vector<RelativeGtRow> read_relative_gt_csv(const std::filesystem::path& path) {
  std::vector<RelativeGtRow> out;
  for (const auto& row : csv::read_rows(path, /*skip_header=*/true)) {
    if (row.fields.size() < 8) {
      throw data_error("relative ground-truth row has fewer than 8 columns at " + path.string() + ":" +
                       std::to_string(row.line));
    }
    RelativeGtRow r;
    r.timestamp_a = csv::to_int64(row.fields[0], path, row.line);
    r.timestamp_b = csv::to_int64(row.fields[1], path, row.line);
    for (std::size_t i = 0; i < 6; ++i) r.dof[i] = csv::to_double(row.fields[i + 2], path, row.line);
    out.push_back(r);
  }
  return out;
}

void write_camera_index(const std::filesystem::path& path, const std::vector<FrameRecord>& frames) {
  auto out = csv::open_for_write(path);
  out << "#timestamp [ns],filename\n";
  for (const auto& f : frames) out << f.timestamp << ',' << f.image_filename << '\n';
}

void write_groundtruth(const std::filesystem::path& path, const std::vector<GroundTruthRecord>& gt) {
  auto out = csv::open_for_write(path);
  out << "#timestamp, p_RS_R_x [m], p_RS_R_y [m], p_RS_R_z [m], q_RS_w [], q_RS_x [], q_RS_y [], q_RS_z []\n";
  for (const auto& r : gt) {
    out << r.timestamp;
    for (double v : {r.position.x(), r.position.y(), r.position.z(), r.orientation.w, r.orientation.x,
                     r.orientation.y, r.orientation.z}) {
      out << ',' << csv::format_double(v, 17);
    }
    out << '\n';
  }
}

}  // namespace dofvo
