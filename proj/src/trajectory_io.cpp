#include "dofvo/trajectory_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dofvo/csv.hpp"

namespace dofvo {

void write_pose_csv(const std::filesystem::path& path, const std::vector<PoseRow>& rows) {
  auto out = csv::open_for_write(path);
  out << "timestamp_a_ns,timestamp_b_ns,tx,ty,tz,rx,ry,rz,inliers,failed\n";
  for (const auto& r : rows) {
    out << r.timestamp_a << ',' << r.timestamp_b;
    for (double v : r.dof.values) out << ',' << csv::format_double(v, 17);
    out << ',' << r.inliers << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

std::vector<PoseRow> read_pose_csv(const std::filesystem::path& path) {
  std::vector<PoseRow> out;
  for (const auto& row : csv::read_rows(path, /*skip_header=*/true)) {
    if (row.fields.size() < 10) {
      throw data_error("pose row has fewer than 10 columns at " + path.string() + ":" + std::to_string(row.line));
    }
    PoseRow r;
    r.timestamp_a = csv::to_int64(row.fields[0], path, row.line);
    r.timestamp_b = csv::to_int64(row.fields[1], path, row.line);
    for (std::size_t i = 0; i < 6; ++i) r.dof[i] = csv::to_double(row.fields[i + 2], path, row.line);
    r.inliers = static_cast<std::size_t>(csv::to_int64(row.fields[8], path, row.line));
    const auto failed = csv::to_int64(row.fields[9], path, row.line);
    if (failed != 0 && failed != 1) {
      throw data_error("failed flag must be 0 or 1 at " + path.string() + ":" + std::to_string(row.line));
    }
    r.failed = failed == 1;
    out.push_back(r);
  }
  return out;
}

void write_tum_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = csv::open_for_write(path);
  char stamp[48];
  for (const auto& p : traj.poses) {
    const Nanoseconds ns = p.timestamp;
    const Nanoseconds sec = ns / 1'000'000'000;
    const Nanoseconds frac = std::abs(ns % 1'000'000'000);
    std::snprintf(stamp, sizeof stamp, "%s%lld.%09lld", (ns < 0 && sec == 0) ? "-" : "",
                  static_cast<long long>(sec), static_cast<long long>(frac));
    const Quaternion q = rotation_to_quat(p.pose.rotation);
    out << stamp;
    for (double v : {p.pose.translation.x(), p.pose.translation.y(), p.pose.translation.z(), q.x, q.y, q.z, q.w}) {
      out << ' ' << csv::format_double(v, 17);
    }
    out << '\n';
  }
}

Trajectory read_tum_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open trajectory " + path.string());
  Trajectory traj;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string stamp;
    double v[7];
    if (!(ls >> stamp >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5] >> v[6])) {
      throw data_error("malformed trajectory line at " + path.string() + ":" + std::to_string(number));
    }
    // Parse seconds exactly: integer part and up to 9 fractional digits.
    const auto dot = stamp.find('.');
    const bool negative = !stamp.empty() && stamp[0] == '-';
    const std::string whole = stamp.substr(negative ? 1 : 0, dot == std::string::npos ? std::string::npos : dot - (negative ? 1 : 0));
    std::string frac = dot == std::string::npos ? "" : stamp.substr(dot + 1);
    if (frac.size() > 9) frac.resize(9);
    frac.append(9 - frac.size(), '0');
    Nanoseconds ns = csv::to_int64(whole.empty() ? "0" : whole, path, number) * 1'000'000'000 +
                     csv::to_int64(frac, path, number);
    if (negative) ns = -ns;
    StampedPose p;
    p.timestamp = ns;
    p.pose.translation = {v[0], v[1], v[2]};
    p.pose.rotation = quat_to_rotation({v[6], v[3], v[4], v[5]});
    traj.poses.push_back(p);
  }
  return traj;
}

}  // namespace dofvo
