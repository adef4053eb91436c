#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deeppco/errors.hpp"
#include "deeppco/tensor.hpp"

namespace deeppco {

// Unordered lidar scan in the sensor frame, meters. Intensity, when
// present, is carried through parsing but ignored by the encoder.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<float> intensity;  // empty or same length as points

  std::size_t size() const { return points.size(); }
};

// Panoramic projection geometry. Azimuth covers the full circle; the
// elevation field of view is [phi_min, phi_max).
struct ProjectionConfig {
  int width = 1024;   // azimuth bins
  int height = 64;    // elevation bins
  double phi_min = -24.9 * M_PI / 180.0;
  double phi_max = 2.0 * M_PI / 180.0;
  double d_max = 80.0;  // range clamp, meters

  double delta_theta() const { return 2.0 * M_PI / width; }
  double delta_phi() const { return (phi_max - phi_min) / height; }

  bool operator==(const ProjectionConfig&) const = default;
};

ProjectionConfig tiny_projection();  // 16 x 64, desk-scale tests
ProjectionConfig full_projection();  // 64 x 1024, HDL-64E

// Panoramic depth image. Values live in [0, 255], stored as doubles;
// quantization happens only on PGM export. Row 0 corresponds to
// elevation index c = 0 (phi = phi_min); export flips so the top row is
// phi_max. Cells never written stay exactly 0.
struct DepthImage {
  ProjectionConfig config;
  std::vector<double> grid;  // height x width, row-major by elevation index

  DepthImage() = default;
  explicit DepthImage(const ProjectionConfig& cfg)
      : config(cfg),
        grid(static_cast<std::size_t>(cfg.height) * cfg.width, 0.0) {}

  double& at(int c, int r) {
    return grid[static_cast<std::size_t>(c) * config.width + r];
  }
  double at(int c, int r) const {
    return grid[static_cast<std::size_t>(c) * config.width + r];
  }
};

struct CellHit {
  int r;         // azimuth index, [0, width)
  int c;         // elevation index, [0, height)
  double range;  // Euclidean range, meters
};

struct EncodeStats {
  std::size_t total = 0;
  std::size_t in_fov = 0;
  std::size_t out_of_fov = 0;
  std::size_t dropped_origin = 0;
  std::size_t collisions = 0;  // points landing in an already occupied cell
};

// Spherical projection of one point. Azimuth is wrapped to [0, 2π)
// before binning so negative angles never produce negative indices.
// Returns nullopt when the elevation falls outside [phi_min, phi_max).
std::optional<CellHit> project_point(double x, double y, double z,
                                     const ProjectionConfig& cfg);

// Inverse-depth normalization: 255 at the sensor, 0 at d_max and beyond.
double normalize_depth(double d, const ProjectionConfig& cfg);

// Collisions keep the nearest point. Throws EmptyCloud.
DepthImage project_cloud(const PointCloud& pc, const ProjectionConfig& cfg,
                         EncodeStats* stats = nullptr);

// Stacked two-frame network input, values rescaled to [0, 1].
// The translation branch sees the two frames as 2 channels; the
// orientation branch sees each frame replicated to 3 channels (6 total)
// to match a FlowNet-shaped first layer. Channel block 0 is always the
// earlier frame.
struct FramePairInput {
  Tensor translation_input;  // (2, H, W)
  Tensor orientation_input;  // (6, H, W)
};

FramePairInput stack_pair(const DepthImage& prev, const DepthImage& curr);

// Debug export: binary PGM (P5, maxval 255), top row = phi_max.
void write_pgm(const DepthImage& img, const std::string& path);

}  // namespace deeppco
