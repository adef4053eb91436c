#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "deeppco/dataset.hpp"
#include "deeppco/encoding.hpp"
#include "deeppco/pose.hpp"

namespace deeppco {

// Surface primitive in the world frame. Points are sampled uniformly by
// area on the surface, before range noise.
struct Primitive {
  enum class Kind { kPlane, kBox, kCylinder };
  Kind kind = Kind::kPlane;
  Pose pose;                 // primitive -> world
  Eigen::Vector3d size = {1, 1, 1};
  // plane: (sx, sy, _) rectangle in the local xy plane
  // box: full extents (sx, sy, sz), all six faces
  // cylinder: (radius, height, _) lateral surface, axis = local z

  double area() const;
  Eigen::Vector3d sample_local(std::mt19937_64& rng) const;
  Eigen::Vector3d sample_world(std::mt19937_64& rng) const;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  int points_per_frame = 2000;
  double noise_sigma = 0.0;  // range noise along the ray, meters
  std::uint64_t seed = 0;
  double d_max = 80.0;
};

// Per-step relative motion generator. Rotation components are clamped
// to magnitude < π/4 per step to stay clear of gimbal lock.
struct MotionSpec {
  enum class Kind { kConstant, kSinusoidal, kRandomWalk };
  Kind kind = Kind::kConstant;
  PoseVec6 base;       // mean step
  PoseVec6 amplitude;  // sinusoid amplitude / random-walk half-range
  double period = 20.0;  // frames, sinusoidal
  std::uint64_t seed = 0;

  PoseVec6 step(int i, std::mt19937_64& rng) const;
};

struct SyntheticSequence {
  std::vector<PointCloud> scans;  // sensor frame
  std::vector<Pose> poses;        // absolute, world frame
  std::vector<PoseVec6> labels;   // exact relative steps, size n-1
};

// World surface samples are drawn once from scene.seed, then observed
// from each pose; noise perturbs points, never poses, so the labels are
// exact by construction. Throws DegenerateScene when a frame has no
// point inside fov_check's field of view and d_max.
SyntheticSequence generate_sequence(const SceneSpec& scene,
                                    const MotionSpec& motion, int n_frames,
                                    const ProjectionConfig& fov_check = tiny_projection());

// Closed corridor with ground plane and pillars; fills a healthy
// fraction of tiny-profile depth-image cells from anywhere along +x.
SceneSpec default_scene(std::uint64_t seed);

// Forward motion with mild per-step variation, for train/eval sets.
MotionSpec default_motion(std::uint64_t seed);

// Encode consecutive frames into network inputs with the exact labels.
std::vector<SamplePair> encode_pairs(const SyntheticSequence& seq,
                                     const ProjectionConfig& cfg);

// Emit the sequence in the KITTI on-disk layout under <root>, so the
// real ingestion path can be exercised end to end. Writes velodyne
// .bin scans, the pose file, and an identity calib.
void write_kitti_layout(const std::filesystem::path& root,
                        const std::string& sequence_id,
                        const SyntheticSequence& seq);

}  // namespace deeppco
