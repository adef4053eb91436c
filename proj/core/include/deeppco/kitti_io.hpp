#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "deeppco/dataset.hpp"
#include "deeppco/encoding.hpp"
#include "deeppco/pose.hpp"

namespace deeppco {

struct ScanRecord {
  std::string sequence;  // "00".."10"
  int frame = 0;
  PointCloud cloud;
};

// Train/test sequence split. Defaults follow the usual odometry split:
// 00-03 and 05-09 train, 04 and 10 test.
struct SplitSpec {
  std::vector<std::string> train = {"00", "01", "02", "03",
                                    "05", "06", "07", "08", "09"};
  std::vector<std::string> test = {"04", "10"};
};

// <root>/sequences/<id>/velodyne/<frame>.bin, <root>/poses/<id>.txt
struct DatasetLayout {
  std::filesystem::path root;
  std::string sequences_dir = "sequences";
  std::string poses_dir = "poses";

  std::filesystem::path scan_path(const std::string& seq, int frame) const;
  std::filesystem::path pose_path(const std::string& seq) const;
  std::filesystem::path calib_path(const std::string& seq) const;
  std::vector<std::filesystem::path> list_scans(const std::string& seq) const;
};

// Little-endian f32 quadruples (x, y, z, intensity), no header.
// Throws TruncatedFile when the size is not a multiple of 16. Non-finite
// points are dropped; *dropped_nonfinite (if given) receives the count.
PointCloud read_velodyne_bin(const std::filesystem::path& path,
                             std::size_t* dropped_nonfinite = nullptr);

// ASCII, 12 space-separated reals per line, row-major 3x4 [R|t].
// Rotation blocks are re-orthonormalized when ASCII rounding drifted
// them beyond 1e-6. Throws MalformedLine with the 1-based line number.
std::vector<Pose> read_kitti_poses(const std::filesystem::path& path);

// One 12-number row-major 3x4 line per pose, full precision;
// read_kitti_poses round-trips within 1e-9.
void write_kitti_trajectory(const std::filesystem::path& path,
                            const std::vector<Pose>& traj);

// Velodyne-to-camera extrinsic (the "Tr:" entry of a KITTI calib file).
// Ground-truth poses are camera-frame; labels are mapped into the
// sensor frame via Tr⁻¹ ∘ rel ∘ Tr. Missing file -> identity (caveat:
// labels then stay in the camera frame).
Pose read_calibration(const std::filesystem::path& calib_file);

// Relative-pose labels for consecutive frames, applying the calibration
// to each label. Scans are encoded eagerly here; use KittiPairDataset
// for the lazy path.
std::vector<SamplePair> build_pairs(const std::vector<ScanRecord>& seq,
                                    const std::vector<Pose>& poses,
                                    const ProjectionConfig& cfg,
                                    const Pose& calib = Pose());

// Lazy pair loader over one on-disk sequence. Scans are read and
// encoded on demand; a bounded cache of encoded frames keeps sequential
// sweeps cheap without holding a full sequence in memory.
class KittiPairDataset final : public PairDataset {
 public:
  KittiPairDataset(const DatasetLayout& layout, const std::string& seq,
                   const ProjectionConfig& cfg, std::size_t cache_capacity = 64);

  std::size_t size() const override;
  SamplePair get(std::size_t i) const override;

  const std::vector<Pose>& poses() const { return poses_; }
  const Pose& calibration() const { return calib_; }

 private:
  DepthImage frame(std::size_t i) const;

  std::vector<std::filesystem::path> scan_paths_;
  std::vector<Pose> poses_;
  Pose calib_;
  ProjectionConfig cfg_;
  std::size_t cache_capacity_;

  mutable std::mutex mu_;
  mutable std::map<std::size_t, std::pair<DepthImage, std::uint64_t>> cache_;
  mutable std::uint64_t tick_ = 0;
};

}  // namespace deeppco
