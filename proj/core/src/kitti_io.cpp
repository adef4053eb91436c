#include "deeppco/kitti_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace deeppco {

namespace fs = std::filesystem;

std::filesystem::path DatasetLayout::scan_path(const std::string& seq,
                                               int frame) const {
  char name[16];
  std::snprintf(name, sizeof(name), "%06d.bin", frame);
  return root / sequences_dir / seq / "velodyne" / name;
}

std::filesystem::path DatasetLayout::pose_path(const std::string& seq) const {
  return root / poses_dir / (seq + ".txt");
}

std::filesystem::path DatasetLayout::calib_path(const std::string& seq) const {
  return root / sequences_dir / seq / "calib.txt";
}

std::vector<fs::path> DatasetLayout::list_scans(const std::string& seq) const {
  const fs::path dir = root / sequences_dir / seq / "velodyne";
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".bin") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

PointCloud read_velodyne_bin(const fs::path& path, std::size_t* dropped_nonfinite) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open " + path.string());
  const std::streamoff bytes = f.tellg();
  if (bytes % 16 != 0) {
    throw TruncatedFile(path.string() + ": size " + std::to_string(bytes) +
                        " not a multiple of 16");
  }
  f.seekg(0);
  const std::size_t n = static_cast<std::size_t>(bytes) / 16;

  PointCloud pc;
  pc.points.reserve(n);
  pc.intensity.reserve(n);
  std::size_t dropped = 0;
  float quad[4];
  for (std::size_t i = 0; i < n; ++i) {
    f.read(reinterpret_cast<char*>(quad), sizeof(quad));
    if (!f) throw TruncatedFile(path.string() + ": short read");
    if (!std::isfinite(quad[0]) || !std::isfinite(quad[1]) ||
        !std::isfinite(quad[2])) {
      ++dropped;
      continue;
    }
    pc.points.emplace_back(quad[0], quad[1], quad[2]);
    pc.intensity.push_back(quad[3]);
  }
  if (dropped_nonfinite) *dropped_nonfinite = dropped;
  return pc;
}

std::vector<Pose> read_kitti_poses(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());

  std::vector<Pose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ss >> v[i]) || !std::isfinite(v[i])) {
        throw MalformedLine(path.string() + ":" + std::to_string(lineno) +
                            ": expected 12 finite numbers");
      }
    }
    double extra;
    if (ss >> extra) {
      throw MalformedLine(path.string() + ":" + std::to_string(lineno) +
                          ": more than 12 numbers");
    }
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    // Pose ctor re-orthonormalizes ASCII-rounded rotations
    poses.emplace_back(r, Eigen::Vector3d(v[3], v[7], v[11]));
  }
  return poses;
}

void write_kitti_trajectory(const fs::path& path, const std::vector<Pose>& traj) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.precision(17);
  for (const Pose& p : traj) {
    const Eigen::Matrix3d& r = p.rotation();
    const Eigen::Vector3d& t = p.translation();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        f << r(row, col) << ' ';
      }
      f << t[row];
      if (row < 2) f << ' ';
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

Pose read_calibration(const fs::path& calib_file) {
  std::ifstream f(calib_file);
  if (!f) return Pose();  // identity; labels stay in the pose frame
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("Tr:", 0) != 0) continue;
    std::istringstream ss(line.substr(3));
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ss >> v[i])) {
        throw MalformedLine(calib_file.string() + ": bad Tr entry");
      }
    }
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    return Pose(r, Eigen::Vector3d(v[3], v[7], v[11]));
  }
  return Pose();
}

namespace {

PoseVec6 pair_label(const Pose& t0, const Pose& t1, const Pose& calib) {
  // camera-frame relative motion expressed in the sensor frame
  const Pose rel = relative_pose(t0, t1);
  const Pose in_sensor = compose(invert(calib), compose(rel, calib));
  return pose_to_vec6(in_sensor);
}

}  // namespace

std::vector<SamplePair> build_pairs(const std::vector<ScanRecord>& seq,
                                    const std::vector<Pose>& poses,
                                    const ProjectionConfig& cfg,
                                    const Pose& calib) {
  if (seq.size() != poses.size()) {
    throw LengthMismatch("build_pairs: " + std::to_string(seq.size()) +
                         " scans vs " + std::to_string(poses.size()) + " poses");
  }
  if (seq.size() < 2) {
    throw LengthMismatch("build_pairs: need at least 2 frames");
  }

  std::vector<SamplePair> out;
  out.reserve(seq.size() - 1);
  DepthImage prev = project_cloud(seq[0].cloud, cfg);
  for (std::size_t i = 1; i < seq.size(); ++i) {
    DepthImage curr = project_cloud(seq[i].cloud, cfg);
    out.push_back({stack_pair(prev, curr), pair_label(poses[i - 1], poses[i], calib)});
    prev = std::move(curr);
  }
  return out;
}

KittiPairDataset::KittiPairDataset(const DatasetLayout& layout,
                                   const std::string& seq,
                                   const ProjectionConfig& cfg,
                                   std::size_t cache_capacity)
    : scan_paths_(layout.list_scans(seq)),
      poses_(read_kitti_poses(layout.pose_path(seq))),
      calib_(read_calibration(layout.calib_path(seq))),
      cfg_(cfg),
      cache_capacity_(std::max<std::size_t>(cache_capacity, 2)) {
  if (scan_paths_.size() != poses_.size()) {
    throw LengthMismatch("sequence " + seq + ": " +
                         std::to_string(scan_paths_.size()) + " scans vs " +
                         std::to_string(poses_.size()) + " poses");
  }
  if (scan_paths_.size() < 2) {
    throw LengthMismatch("sequence " + seq + ": need at least 2 frames");
  }
}

std::size_t KittiPairDataset::size() const { return scan_paths_.size() - 1; }

DepthImage KittiPairDataset::frame(std::size_t i) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = cache_.find(i); it != cache_.end()) {
    it->second.second = ++tick_;
    return it->second.first;
  }
  DepthImage img = project_cloud(read_velodyne_bin(scan_paths_[i]), cfg_);
  if (cache_.size() >= cache_capacity_) {
    auto victim = cache_.begin();
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
      if (it->second.second < victim->second.second) victim = it;
    }
    cache_.erase(victim);
  }
  cache_.emplace(i, std::make_pair(img, ++tick_));
  return img;
}

SamplePair KittiPairDataset::get(std::size_t i) const {
  const DepthImage a = frame(i);
  const DepthImage b = frame(i + 1);
  return {stack_pair(a, b), pair_label(poses_[i], poses_[i + 1], calib_)};
}

}  // namespace deeppco
