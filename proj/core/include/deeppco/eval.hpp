#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "deeppco/pose.hpp"

namespace deeppco {

// Frame-to-frame RMSE over relative poses. t_rel in meters, r_rel in
// radians (the orientation columns are labeled explicitly in reports).
struct RmseReport {
  double t_rel = 0.0;
  double r_rel = 0.0;
  std::size_t pair_count = 0;
};

RmseReport rmse_relative(std::span<const PoseVec6> preds,
                         std::span<const PoseVec6> truths);

// KITTI segment drift: translation error as % of segment length and
// rotation error in deg/m, averaged over all 100..800 m segments.
struct DriftReport {
  double translation_percent = 0.0;
  double rotation_deg_per_m = 0.0;
  std::vector<double> segment_lengths;  // the lengths that fit
  std::size_t segments_evaluated = 0;
  bool valid = false;  // false: trajectory shorter than the smallest segment
};

DriftReport kitti_drift(const std::vector<Pose>& pred_traj,
                        const std::vector<Pose>& gt_traj);

// Drift over a single segment length, for convergence studies.
DriftReport kitti_drift_at_length(const std::vector<Pose>& pred_traj,
                                  const std::vector<Pose>& gt_traj,
                                  double segment_length);

void export_trajectory_csv(const std::vector<Pose>& traj,
                           const std::filesystem::path& path);
std::vector<Pose> import_trajectory_csv(const std::filesystem::path& path);

// Top-down (x-z plane) SVG with ground truth and prediction polylines.
void export_trajectory_svg(const std::vector<Pose>& pred,
                           const std::vector<Pose>& gt,
                           const std::filesystem::path& path);

// Published reference results on the KITTI odometry benchmark.
// Formatting fixtures only — never asserted as this build's performance.
struct ReferenceRmse {
  const char* model;
  const char* sequence;
  double t_rel;
  double r_rel;
};
inline constexpr ReferenceRmse kReferenceRmse[] = {
    {"DeepPCO", "04", 0.0263, 0.0305},
    {"DeepPCO", "10", 0.0247, 0.0659},
};

struct ReferenceDrift {
  const char* model;
  const char* sequence;
  double translation_percent;
  double rotation_deg_per_m;
};
inline constexpr ReferenceDrift kReferenceDrift[] = {
    {"LOAM", "04", 2.3245, 0.0108},
    {"DeepPCO", "04", 3.1012, 0.0177},
};

// Human-readable report table; also written as machine-readable CSV by
// write_report_csv. Both formats are golden-tested.
std::string format_rmse_report(const std::string& label, const RmseReport& r);
std::string format_drift_report(const std::string& label, const DriftReport& d);
void write_report_csv(const std::filesystem::path& path,
                      const std::string& label, const RmseReport& rmse,
                      const DriftReport* drift = nullptr);

}  // namespace deeppco
