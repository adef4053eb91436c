#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "deeppco/kitti_io.hpp"
#include "deeppco/synthetic.hpp"

using namespace deeppco;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& p, const void* data, std::size_t n) {
  std::ofstream f(p, std::ios::binary);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

}  // namespace

TEST_CASE("read_velodyne_bin") {
  const fs::path dir = temp_dir("deeppco_velo");

  SUBCASE("empty file gives empty cloud") {
    write_bytes(dir / "empty.bin", nullptr, 0);
    std::size_t dropped = 99;
    const PointCloud pc = read_velodyne_bin(dir / "empty.bin", &dropped);
    CHECK(pc.points.empty());
    CHECK(dropped == 0);
  }

  SUBCASE("two known quadruples parse exactly") {
    const float data[8] = {1.5f, -2.5f, 3.0f, 0.5f, 10.f, 20.f, 30.f, 0.9f};
    write_bytes(dir / "two.bin", data, sizeof(data));
    const PointCloud pc = read_velodyne_bin(dir / "two.bin");
    REQUIRE(pc.points.size() == 2);
    CHECK(pc.points[0] == Eigen::Vector3d(1.5, -2.5, 3.0));
    CHECK(pc.points[1] == Eigen::Vector3d(10, 20, 30));
    CHECK(pc.intensity[0] == 0.5f);
    CHECK(pc.intensity[1] == 0.9f);
  }

  SUBCASE("size not divisible by 16 throws") {
    const char junk[10] = {};
    write_bytes(dir / "trunc.bin", junk, sizeof(junk));
    CHECK_THROWS_AS(read_velodyne_bin(dir / "trunc.bin"), TruncatedFile);
  }

  SUBCASE("non-finite points are dropped with a count") {
    const float data[8] = {NAN, 0, 0, 0, 1, 2, 3, 0};
    write_bytes(dir / "nan.bin", data, sizeof(data));
    std::size_t dropped = 0;
    const PointCloud pc = read_velodyne_bin(dir / "nan.bin", &dropped);
    CHECK(pc.points.size() == 1);
    CHECK(dropped == 1);
  }

  SUBCASE("missing file throws IoError") {
    CHECK_THROWS_AS(read_velodyne_bin(dir / "nope.bin"), IoError);
  }
}

TEST_CASE("read_kitti_poses") {
  const fs::path dir = temp_dir("deeppco_poses");

  SUBCASE("identity and pure translation lines") {
    std::ofstream f(dir / "p.txt");
    f << "1 0 0 0 0 1 0 0 0 0 1 0\n";
    f << "1 0 0 1 0 1 0 2 0 0 1 3\n";
    f.close();
    const auto poses = read_kitti_poses(dir / "p.txt");
    REQUIRE(poses.size() == 2);
    CHECK((poses[0].matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(poses[1].translation() == Eigen::Vector3d(1, 2, 3));
    CHECK((poses[1].rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SUBCASE("malformed lines carry the line number") {
    std::ofstream f(dir / "bad.txt");
    f << "1 0 0 0 0 1 0 0 0 0 1 0\n";
    f << "1 0 0 garbage\n";
    f.close();
    CHECK_THROWS_WITH_AS(read_kitti_poses(dir / "bad.txt"),
                         doctest::Contains(":2"), MalformedLine);

    std::ofstream g(dir / "extra.txt");
    g << "1 0 0 0 0 1 0 0 0 0 1 0 5\n";
    g.close();
    CHECK_THROWS_AS(read_kitti_poses(dir / "extra.txt"), MalformedLine);
  }

  SUBCASE("rounded rotations are re-orthonormalized") {
    std::ofstream f(dir / "round.txt");
    f << "0.99999 0.00001 0 0 -0.00001 0.99999 0 0 0 0 0.99999 0\n";
    f.close();
    const auto poses = read_kitti_poses(dir / "round.txt");
    const Eigen::Matrix3d r = poses[0].rotation();
    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("trajectory write/read round trip") {
  const fs::path dir = temp_dir("deeppco_traj");

  SUBCASE("identity") {
    write_kitti_trajectory(dir / "t.txt", {Pose()});
    std::ifstream f(dir / "t.txt");
    std::string line;
    std::getline(f, line);
    CHECK(line == "1 0 0 0 0 1 0 0 0 0 1 0");
  }

  SUBCASE("empty trajectory gives empty file") {
    write_kitti_trajectory(dir / "e.txt", {});
    CHECK(fs::file_size(dir / "e.txt") == 0);
    CHECK(read_kitti_poses(dir / "e.txt").empty());
  }

  SUBCASE("random trajectory round-trips within 1e-9") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Pose> traj;
    traj.push_back(Pose());
    for (int i = 0; i < 50; ++i) {
      PoseVec6 step;
      step.p = {u(rng), u(rng), u(rng)};
      step.q = {0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
      traj.push_back(compose(traj.back(), vec6_to_pose(step)));
    }
    write_kitti_trajectory(dir / "r.txt", traj);
    const auto back = read_kitti_poses(dir / "r.txt");
    REQUIRE(back.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
      CHECK((back[i].matrix() - traj[i].matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("build_pairs") {
  const ProjectionConfig cfg = tiny_projection();
  const SceneSpec scene = default_scene(11);

  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(build_pairs({}, {Pose()}, cfg), LengthMismatch);
  }

  SUBCASE("labels equal the generating step") {
    MotionSpec motion;
    motion.kind = MotionSpec::Kind::kConstant;
    motion.base.p = {0.5, 0, 0};
    const SyntheticSequence seq = generate_sequence(scene, motion, 5);

    std::vector<ScanRecord> scans;
    for (std::size_t i = 0; i < seq.scans.size(); ++i) {
      scans.push_back({"00", static_cast<int>(i), seq.scans[i]});
    }
    const auto pairs = build_pairs(scans, seq.poses, cfg);
    REQUIRE(pairs.size() == 4);
    for (const SamplePair& p : pairs) {
      CHECK((p.label.p - Eigen::Vector3d(0.5, 0, 0)).norm() < 1e-9);
      CHECK(p.label.q.norm() < 1e-9);
    }
  }

  SUBCASE("stationary sequence has zero labels") {
    MotionSpec still;
    const SyntheticSequence seq = generate_sequence(scene, still, 3);
    std::vector<ScanRecord> scans;
    for (std::size_t i = 0; i < seq.scans.size(); ++i) {
      scans.push_back({"00", static_cast<int>(i), seq.scans[i]});
    }
    const auto pairs = build_pairs(scans, seq.poses, cfg);
    for (const SamplePair& p : pairs) {
      CHECK(p.label.p.norm() < 1e-12);
      CHECK(p.label.q.norm() < 1e-12);
    }
  }
}

TEST_CASE("calibration maps labels into the sensor frame") {
  // camera frame rotated 90 deg about x relative to the sensor
  const Pose calib(euler_to_rotation({M_PI / 2, 0, 0}), {0.1, -0.2, 0.3});
  const Pose step_sensor = vec6_to_pose({{0.4, 0.02, -0.01}, {0.01, -0.02, 0.03}});
  // camera motion observed for that sensor motion
  const Pose step_camera = compose(calib, compose(step_sensor, invert(calib)));

  const std::vector<Pose> cam_traj = {Pose(), step_camera};
  // recover through the kitti label path
  const Pose rel = relative_pose(cam_traj[0], cam_traj[1]);
  const Pose back = compose(invert(calib), compose(rel, calib));
  CHECK((back.matrix() - step_sensor.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lazy dataset matches eager pairs through the real ingestion path") {
  const fs::path root = temp_dir("deeppco_kitti_root");
  const SyntheticSequence seq =
      generate_sequence(default_scene(21), default_motion(22), 8);
  write_kitti_layout(root, "00", seq);

  DatasetLayout layout{root};
  const ProjectionConfig cfg = tiny_projection();
  KittiPairDataset lazy(layout, "00", cfg, 3);  // tiny cache forces eviction
  REQUIRE(lazy.size() == 7);

  std::vector<ScanRecord> scans;
  for (std::size_t i = 0; i < seq.scans.size(); ++i) {
    scans.push_back({"00", static_cast<int>(i),
                     read_velodyne_bin(layout.scan_path("00", static_cast<int>(i)))});
  }
  const auto eager = build_pairs(scans, lazy.poses(), cfg, lazy.calibration());

  // out-of-order access, exercising the cache
  for (std::size_t i : {std::size_t(6), std::size_t(0), std::size_t(3),
                        std::size_t(0), std::size_t(6)}) {
    const SamplePair a = lazy.get(i);
    CHECK(a.input.translation_input.v == eager[i].input.translation_input.v);
    CHECK((a.label.p - eager[i].label.p).norm() == 0.0);
  }

  // labels integrate back to the ground-truth trajectory
  std::vector<PoseVec6> labels;
  for (std::size_t i = 0; i < lazy.size(); ++i) labels.push_back(lazy.get(i).label);
  const auto rebuilt = integrate_trajectory(lazy.poses()[0], labels);
  for (std::size_t i = 0; i < rebuilt.size(); ++i) {
    CHECK((rebuilt[i].translation() - lazy.poses()[i].translation()).norm() < 1e-6);
  }
}

TEST_CASE("scan/pose count mismatch is a typed error") {
  const fs::path root = temp_dir("deeppco_kitti_bad");
  const SyntheticSequence seq =
      generate_sequence(default_scene(31), default_motion(32), 4);
  write_kitti_layout(root, "00", seq);
  // drop one scan
  fs::remove(root / "sequences" / "00" / "velodyne" / "000003.bin");
  DatasetLayout layout{root};
  CHECK_THROWS_AS(KittiPairDataset(layout, "00", tiny_projection()), LengthMismatch);
}
