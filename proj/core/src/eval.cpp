#include "deeppco/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "deeppco/errors.hpp"

namespace deeppco {

RmseReport rmse_relative(std::span<const PoseVec6> preds,
                         std::span<const PoseVec6> truths) {
  if (preds.size() != truths.size()) {
    throw LengthMismatch("rmse_relative: " + std::to_string(preds.size()) +
                         " predictions vs " + std::to_string(truths.size()) +
                         " truths");
  }
  if (preds.empty()) throw LengthMismatch("rmse_relative: empty input");

  double t_sq = 0.0, r_sq = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    t_sq += (preds[i].p - truths[i].p).squaredNorm();
    for (int c = 0; c < 3; ++c) {
      const double d = wrap_angle(preds[i].q[c] - truths[i].q[c]);
      r_sq += d * d;
    }
  }
  RmseReport r;
  r.pair_count = preds.size();
  r.t_rel = std::sqrt(t_sq / static_cast<double>(preds.size()));
  r.r_rel = std::sqrt(r_sq / static_cast<double>(preds.size()));
  return r;
}

namespace {

double rotation_angle(const Eigen::Matrix3d& r) {
  // trace formula, clamped against rounding for near-identity errors;
  // acos is catastrophically steep at 1, so identity-up-to-roundoff
  // snaps to exactly zero (1e-12 here is ~1.4e-6 rad, far below any
  // reportable drift)
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  if (c >= 1.0 - 1e-12) return 0.0;
  return std::acos(c);
}

std::vector<double> cumulative_path_length(const std::vector<Pose>& traj) {
  std::vector<double> dist(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    dist[i] = dist[i - 1] +
              (traj[i].translation() - traj[i - 1].translation()).norm();
  }
  return dist;
}

DriftReport drift_over_lengths(const std::vector<Pose>& pred,
                               const std::vector<Pose>& gt,
                               const std::vector<double>& lengths) {
  if (pred.size() != gt.size()) {
    throw LengthMismatch("kitti_drift: trajectory lengths differ");
  }
  if (gt.size() < 2) throw LengthMismatch("kitti_drift: need >= 2 poses");

  const std::vector<double> dist = cumulative_path_length(gt);

  DriftReport rep;
  double t_sum = 0.0, r_sum = 0.0;
  for (double len : lengths) {
    bool used = false;
    for (std::size_t start = 0; start + 1 < gt.size(); ++start) {
      // first frame at least `len` meters of gt path after start
      const auto it =
          std::lower_bound(dist.begin() + static_cast<std::ptrdiff_t>(start),
                           dist.end(), dist[start] + len);
      if (it == dist.end()) break;
      const std::size_t end = static_cast<std::size_t>(it - dist.begin());
      const double seg_len = dist[end] - dist[start];

      const Pose rel_gt = relative_pose(gt[start], gt[end]);
      const Pose rel_pred = relative_pose(pred[start], pred[end]);
      const Pose err = compose(invert(rel_pred), rel_gt);

      t_sum += err.translation().norm() / seg_len;
      r_sum += rotation_angle(err.rotation()) / seg_len;
      ++rep.segments_evaluated;
      used = true;
    }
    if (used) rep.segment_lengths.push_back(len);
  }
  if (rep.segments_evaluated == 0) {
    rep.valid = false;  // no segment fits
    return rep;
  }
  rep.valid = true;
  const double n = static_cast<double>(rep.segments_evaluated);
  rep.translation_percent = 100.0 * t_sum / n;
  rep.rotation_deg_per_m = (180.0 / M_PI) * r_sum / n;
  return rep;
}

}  // namespace

DriftReport kitti_drift(const std::vector<Pose>& pred_traj,
                        const std::vector<Pose>& gt_traj) {
  return drift_over_lengths(pred_traj, gt_traj,
                            {100, 200, 300, 400, 500, 600, 700, 800});
}

DriftReport kitti_drift_at_length(const std::vector<Pose>& pred_traj,
                                  const std::vector<Pose>& gt_traj,
                                  double segment_length) {
  return drift_over_lengths(pred_traj, gt_traj, {segment_length});
}

void export_trajectory_csv(const std::vector<Pose>& traj,
                           const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.precision(17);
  f << "frame,x,y,z\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Eigen::Vector3d& t = traj[i].translation();
    f << i << ',' << t.x() << ',' << t.y() << ',' << t.z() << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<Pose> import_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<Pose> out;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::size_t frame;
    double x, y, z;
    if (!(ss >> frame >> x >> y >> z)) {
      throw MalformedLine(path.string() + ": bad CSV row '" + line + "'");
    }
    out.emplace_back(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, y, z));
  }
  return out;
}

void export_trajectory_svg(const std::vector<Pose>& pred,
                           const std::vector<Pose>& gt,
                           const std::filesystem::path& path) {
  double min_x = 0, max_x = 0, min_z = 0, max_z = 0;
  bool first = true;
  for (const auto* traj : {&pred, &gt}) {
    for (const Pose& p : *traj) {
      const double x = p.translation().x(), z = p.translation().z();
      if (first) {
        min_x = max_x = x;
        min_z = max_z = z;
        first = false;
      }
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_z = std::min(min_z, z);
      max_z = std::max(max_z, z);
    }
  }
  const double margin = 0.05 * std::max({max_x - min_x, max_z - min_z, 1.0});

  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.precision(10);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
    << (min_x - margin) << ' ' << (min_z - margin) << ' '
    << (max_x - min_x + 2 * margin) << ' ' << (max_z - min_z + 2 * margin)
    << "\">\n";
  const auto polyline = [&f](const std::vector<Pose>& traj, const char* stroke) {
    f << "<polyline fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"0.5%\" points=\"";
    for (const Pose& p : traj) {
      f << p.translation().x() << ',' << p.translation().z() << ' ';
    }
    f << "\"/>\n";
  };
  polyline(gt, "black");
  polyline(pred, "crimson");
  f << "<text x=\"" << min_x << "\" y=\"" << (min_z - margin / 2)
    << "\" font-size=\"" << margin << "\">black: ground truth, crimson: "
       "prediction (x-z plane)</text>\n";
  f << "</svg>\n";
  if (!f) throw IoError("write failed: " + path.string());
}

std::string format_rmse_report(const std::string& label, const RmseReport& r) {
  std::ostringstream ss;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %10s %14s %8s\n", "model/sequence",
                "t_rel [m]", "r_rel [rad]", "pairs");
  ss << buf;
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f %14.4f %8zu\n", label.c_str(),
                r.t_rel, r.r_rel, r.pair_count);
  ss << buf;
  for (const ReferenceRmse& ref : kReferenceRmse) {
    std::snprintf(buf, sizeof(buf), "%-24s %10.4f %14.4f %8s\n",
                  (std::string(ref.model) + "/" + ref.sequence + " (ref)").c_str(),
                  ref.t_rel, ref.r_rel, "-");
    ss << buf;
  }
  return ss.str();
}

std::string format_drift_report(const std::string& label, const DriftReport& d) {
  std::ostringstream ss;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %12s %14s %10s\n", "model/sequence",
                "trans [%]", "rot [deg/m]", "segments");
  ss << buf;
  if (d.valid) {
    std::snprintf(buf, sizeof(buf), "%-24s %12.4f %14.4f %10zu\n", label.c_str(),
                  d.translation_percent, d.rotation_deg_per_m,
                  d.segments_evaluated);
  } else {
    std::snprintf(buf, sizeof(buf), "%-24s %12s %14s %10s\n", label.c_str(),
                  "n/a", "n/a", "none fit");
  }
  ss << buf;
  for (const ReferenceDrift& ref : kReferenceDrift) {
    std::snprintf(buf, sizeof(buf), "%-24s %12.4f %14.4f %10s\n",
                  (std::string(ref.model) + "/" + ref.sequence + " (ref)").c_str(),
                  ref.translation_percent, ref.rotation_deg_per_m, "-");
    ss << buf;
  }
  return ss.str();
}

void write_report_csv(const std::filesystem::path& path,
                      const std::string& label, const RmseReport& rmse,
                      const DriftReport* drift) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "label,t_rel_m,r_rel_rad,pairs,drift_trans_percent,drift_rot_deg_per_m,"
       "drift_segments\n";
  char buf[240];
  if (drift && drift->valid) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%zu,%.6f,%.6f,%zu\n",
                  label.c_str(), rmse.t_rel, rmse.r_rel, rmse.pair_count,
                  drift->translation_percent, drift->rotation_deg_per_m,
                  drift->segments_evaluated);
  } else {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%zu,,,\n", label.c_str(),
                  rmse.t_rel, rmse.r_rel, rmse.pair_count);
  }
  f << buf;
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace deeppco
