#include "deeppco/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace deeppco {

double Primitive::area() const {
  switch (kind) {
    case Kind::kPlane:
      return size.x() * size.y();
    case Kind::kBox:
      return 2.0 * (size.x() * size.y() + size.y() * size.z() +
                    size.x() * size.z());
    case Kind::kCylinder:
      return 2.0 * M_PI * size.x() * size.y();
  }
  return 0.0;
}

Eigen::Vector3d Primitive::sample_local(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (kind) {
    case Kind::kPlane:
      return {(u(rng) - 0.5) * size.x(), (u(rng) - 0.5) * size.y(), 0.0};
    case Kind::kBox: {
      const double axy = size.x() * size.y();
      const double ayz = size.y() * size.z();
      const double axz = size.x() * size.z();
      std::discrete_distribution<int> face({axy, axy, ayz, ayz, axz, axz});
      const int f = face(rng);
      const double a = u(rng) - 0.5, b = u(rng) - 0.5;
      switch (f) {
        case 0: return {a * size.x(), b * size.y(), 0.5 * size.z()};
        case 1: return {a * size.x(), b * size.y(), -0.5 * size.z()};
        case 2: return {0.5 * size.x(), a * size.y(), b * size.z()};
        case 3: return {-0.5 * size.x(), a * size.y(), b * size.z()};
        case 4: return {a * size.x(), 0.5 * size.y(), b * size.z()};
        default: return {a * size.x(), -0.5 * size.y(), b * size.z()};
      }
    }
    case Kind::kCylinder: {
      const double ang = 2.0 * M_PI * u(rng);
      return {size.x() * std::cos(ang), size.x() * std::sin(ang),
              (u(rng) - 0.5) * size.y()};
    }
  }
  return Eigen::Vector3d::Zero();
}

Eigen::Vector3d Primitive::sample_world(std::mt19937_64& rng) const {
  return pose.apply(sample_local(rng));
}

PoseVec6 MotionSpec::step(int i, std::mt19937_64& rng) const {
  PoseVec6 s = base;
  switch (kind) {
    case Kind::kConstant:
      break;
    case Kind::kSinusoidal: {
      const double phase = 2.0 * M_PI * i / period;
      s.p += amplitude.p * std::sin(phase);
      s.q += amplitude.q * std::sin(phase);
      break;
    }
    case Kind::kRandomWalk: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int c = 0; c < 3; ++c) s.p[c] += amplitude.p[c] * u(rng);
      for (int c = 0; c < 3; ++c) s.q[c] += amplitude.q[c] * u(rng);
      break;
    }
  }
  // keep labels far from gimbal lock
  constexpr double kMaxStepAngle = M_PI / 4.0 - 1e-6;
  for (int c = 0; c < 3; ++c) {
    s.q[c] = std::clamp(s.q[c], -kMaxStepAngle, kMaxStepAngle);
  }
  return s;
}

SyntheticSequence generate_sequence(const SceneSpec& scene,
                                    const MotionSpec& motion, int n_frames,
                                    const ProjectionConfig& fov_check) {
  if (n_frames < 2) throw BadConfig("generate_sequence: need n_frames >= 2");
  if (scene.primitives.empty()) throw DegenerateScene("scene has no primitives");

  // one fixed set of world surface samples for the whole sequence
  std::mt19937_64 scene_rng(scene.seed);
  std::vector<double> areas;
  areas.reserve(scene.primitives.size());
  for (const Primitive& p : scene.primitives) areas.push_back(p.area());
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());

  std::vector<Eigen::Vector3d> world_points(static_cast<std::size_t>(scene.points_per_frame));
  for (auto& p : world_points) {
    p = scene.primitives[pick(scene_rng)].sample_world(scene_rng);
  }

  SyntheticSequence out;
  std::mt19937_64 motion_rng(motion.seed);
  out.poses.push_back(Pose());
  for (int i = 0; i + 1 < n_frames; ++i) {
    const PoseVec6 step = motion.step(i, motion_rng);
    out.labels.push_back(step);
    out.poses.push_back(compose(out.poses.back(), vec6_to_pose(step)));
  }

  for (int f = 0; f < n_frames; ++f) {
    const Pose sensor_from_world = invert(out.poses[static_cast<std::size_t>(f)]);
    std::mt19937_64 noise_rng(scene.seed ^ (0x9E3779B97F4A7C15ULL *
                                            (static_cast<std::uint64_t>(f) + 1)));
    std::normal_distribution<double> noise(0.0, scene.noise_sigma);

    PointCloud pc;
    pc.points.reserve(world_points.size());
    std::size_t in_fov = 0;
    for (const Eigen::Vector3d& wp : world_points) {
      Eigen::Vector3d p = sensor_from_world.apply(wp);
      const double range = p.norm();
      if (range < 1e-6 || range > scene.d_max) continue;
      if (scene.noise_sigma > 0) {
        p *= (range + noise(noise_rng)) / range;
      }
      pc.points.push_back(p);
      if (project_point(p.x(), p.y(), p.z(), fov_check)) ++in_fov;
    }
    if (in_fov == 0) {
      throw DegenerateScene("frame " + std::to_string(f) +
                            ": no point inside the field of view");
    }
    out.scans.push_back(std::move(pc));
  }
  return out;
}

SceneSpec default_scene(std::uint64_t seed) {
  SceneSpec scene;
  scene.seed = seed;

  scene.points_per_frame = 3000;

  const double length = 150.0;  // corridor along +x
  const double half_w = 9.0;
  const double wall_bottom = -1.7, wall_top = 3.0;
  const double wall_h = wall_top - wall_bottom;
  const double wall_mid = 0.5 * (wall_top + wall_bottom);

  const auto wall = [&](double y) {
    Primitive p;
    p.kind = Primitive::Kind::kPlane;
    p.size = {length, wall_h, 0};
    // plane local xy -> world xz at fixed y
    Eigen::Matrix3d r;
    r.col(0) = Eigen::Vector3d::UnitX();
    r.col(1) = Eigen::Vector3d::UnitZ();
    r.col(2) = -Eigen::Vector3d::UnitY();
    p.pose = Pose(r, {length / 2 - 20.0, y, wall_mid});
    return p;
  };
  scene.primitives.push_back(wall(half_w));
  scene.primitives.push_back(wall(-half_w));

  // ground
  Primitive ground;
  ground.kind = Primitive::Kind::kPlane;
  ground.size = {length, 2 * half_w, 0};
  ground.pose = Pose(Eigen::Matrix3d::Identity(),
                     {length / 2 - 20.0, 0.0, -1.7});
  scene.primitives.push_back(ground);

  // pillars and crates for azimuthal structure
  std::mt19937_64 rng(seed ^ 0xC0FFEE);
  std::uniform_real_distribution<double> ux(-15.0, length - 25.0);
  std::uniform_real_distribution<double> uy(-half_w + 1.5, half_w - 1.5);
  for (int i = 0; i < 25; ++i) {
    Primitive pillar;
    pillar.kind = Primitive::Kind::kCylinder;
    pillar.size = {0.4, wall_h, 0};
    pillar.pose = Pose(Eigen::Matrix3d::Identity(), {ux(rng), uy(rng), wall_mid});
    scene.primitives.push_back(pillar);

    Primitive crate;
    crate.kind = Primitive::Kind::kBox;
    crate.size = {1.2, 1.2, 1.0};
    crate.pose = Pose(Eigen::Matrix3d::Identity(), {ux(rng), uy(rng), -1.2});
    scene.primitives.push_back(crate);
  }
  return scene;
}

MotionSpec default_motion(std::uint64_t seed) {
  MotionSpec m;
  m.kind = MotionSpec::Kind::kRandomWalk;
  m.base.p = {0.35, 0.0, 0.0};
  m.base.q = {0.0, 0.0, 0.004};
  m.amplitude.p = {0.12, 0.04, 0.01};
  m.amplitude.q = {0.004, 0.004, 0.012};
  m.seed = seed;
  return m;
}

std::vector<SamplePair> encode_pairs(const SyntheticSequence& seq,
                                     const ProjectionConfig& cfg) {
  std::vector<SamplePair> out;
  if (seq.scans.size() < 2) return out;
  out.reserve(seq.scans.size() - 1);
  DepthImage prev = project_cloud(seq.scans[0], cfg);
  for (std::size_t i = 1; i < seq.scans.size(); ++i) {
    DepthImage curr = project_cloud(seq.scans[i], cfg);
    out.push_back({stack_pair(prev, curr), seq.labels[i - 1]});
    prev = std::move(curr);
  }
  return out;
}

void write_kitti_layout(const std::filesystem::path& root,
                        const std::string& sequence_id,
                        const SyntheticSequence& seq) {
  namespace fs = std::filesystem;
  const fs::path velo = root / "sequences" / sequence_id / "velodyne";
  fs::create_directories(velo);
  fs::create_directories(root / "poses");

  for (std::size_t i = 0; i < seq.scans.size(); ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "%06zu.bin", i);
    std::ofstream f(velo / name, std::ios::binary);
    if (!f) throw IoError("cannot open " + (velo / name).string());
    for (const Eigen::Vector3d& p : seq.scans[i].points) {
      const float quad[4] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                             static_cast<float>(p.z()), 0.0f};
      f.write(reinterpret_cast<const char*>(quad), sizeof(quad));
    }
  }

  // poses in KITTI 3x4 format; identity sensor-to-pose calibration
  {
    std::ofstream f(root / "poses" / (sequence_id + ".txt"));
    if (!f) throw IoError("cannot open pose file for writing");
    f.precision(17);
    for (const Pose& p : seq.poses) {
      const Eigen::Matrix3d& r = p.rotation();
      const Eigen::Vector3d& t = p.translation();
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) f << r(row, col) << ' ';
        f << t[row];
        if (row < 2) f << ' ';
      }
      f << '\n';
    }
  }
  {
    std::ofstream f(root / "sequences" / sequence_id / "calib.txt");
    f << "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n";
  }
}

}  // namespace deeppco
