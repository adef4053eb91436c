#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "deeppco/errors.hpp"
#include "deeppco/synthetic.hpp"

using namespace deeppco;

TEST_CASE("primitive sampling stays on the surface") {
  std::mt19937_64 rng(3);

  SUBCASE("plane") {
    Primitive p;
    p.kind = Primitive::Kind::kPlane;
    p.size = {4, 2, 0};
    CHECK(p.area() == doctest::Approx(8.0));
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector3d s = p.sample_local(rng);
      CHECK(std::abs(s.x()) <= 2.0);
      CHECK(std::abs(s.y()) <= 1.0);
      CHECK(s.z() == 0.0);
    }
  }

  SUBCASE("box") {
    Primitive p;
    p.kind = Primitive::Kind::kBox;
    p.size = {2, 4, 6};
    CHECK(p.area() == doctest::Approx(2 * (2 * 4 + 4 * 6 + 2 * 6)));
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector3d s = p.sample_local(rng);
      const bool on_face = std::abs(std::abs(s.x()) - 1.0) < 1e-12 ||
                           std::abs(std::abs(s.y()) - 2.0) < 1e-12 ||
                           std::abs(std::abs(s.z()) - 3.0) < 1e-12;
      CHECK(on_face);
      CHECK(std::abs(s.x()) <= 1.0 + 1e-12);
      CHECK(std::abs(s.y()) <= 2.0 + 1e-12);
      CHECK(std::abs(s.z()) <= 3.0 + 1e-12);
    }
  }

  SUBCASE("cylinder") {
    Primitive p;
    p.kind = Primitive::Kind::kCylinder;
    p.size = {0.5, 3, 0};
    CHECK(p.area() == doctest::Approx(2 * M_PI * 0.5 * 3));
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector3d s = p.sample_local(rng);
      CHECK(std::hypot(s.x(), s.y()) == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(std::abs(s.z()) <= 1.5 + 1e-12);
    }
  }

  SUBCASE("sample_world applies the primitive pose") {
    Primitive p;
    p.kind = Primitive::Kind::kPlane;
    p.size = {2, 2, 0};
    p.pose = Pose(euler_to_rotation({0, 0, M_PI / 2}), {10, 0, 5});
    std::mt19937_64 a(9), b(9);
    const Eigen::Vector3d local = p.sample_local(a);
    const Eigen::Vector3d world = p.sample_world(b);
    const Eigen::Vector3d expect =
        p.pose.rotation() * local + p.pose.translation();
    CHECK((world - expect).norm() < 1e-12);
  }
}

TEST_CASE("motion steps") {
  std::mt19937_64 rng(1);

  SUBCASE("constant motion repeats the base step") {
    MotionSpec m;
    m.base.p = {0.5, 0.1, 0};
    m.base.q = {0, 0, 0.01};
    for (int i = 0; i < 10; ++i) {
      const PoseVec6 s = m.step(i, rng);
      CHECK(s.p == m.base.p);
      CHECK(s.q == m.base.q);
    }
  }

  SUBCASE("sinusoidal motion is periodic and centered on the base") {
    MotionSpec m;
    m.kind = MotionSpec::Kind::kSinusoidal;
    m.base.p = {1, 0, 0};
    m.amplitude.p = {0.2, 0.1, 0};
    m.period = 20;
    const PoseVec6 a = m.step(3, rng);
    const PoseVec6 b = m.step(23, rng);
    CHECK((a.p - b.p).norm() < 1e-12);
    double mean_x = 0;
    for (int i = 0; i < 20; ++i) mean_x += m.step(i, rng).p.x();
    CHECK(mean_x / 20 == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("rotation steps are clamped below pi/4") {
    MotionSpec m;
    m.kind = MotionSpec::Kind::kRandomWalk;
    m.base.q = {0.7, 0.7, 0.7};
    m.amplitude.q = {0.5, 0.5, 0.5};
    for (int i = 0; i < 200; ++i) {
      const PoseVec6 s = m.step(i, rng);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(s.q[c]) < M_PI / 4);
    }
  }
}

TEST_CASE("generate_sequence") {
  SUBCASE("zero motion and zero noise give identical scans") {
    SceneSpec scene = default_scene(101);
    scene.points_per_frame = 500;
    MotionSpec still;  // identity base
    const SyntheticSequence seq = generate_sequence(scene, still, 4);
    REQUIRE(seq.scans.size() == 4);
    REQUIRE(seq.labels.size() == 3);
    for (const PoseVec6& l : seq.labels) {
      CHECK(l.p.norm() == 0.0);
      CHECK(l.q.norm() == 0.0);
    }
    // world is sampled once: a static sensor sees the same cloud
    for (std::size_t f = 1; f < seq.scans.size(); ++f) {
      REQUIRE(seq.scans[f].points.size() == seq.scans[0].points.size());
      for (std::size_t i = 0; i < seq.scans[f].points.size(); ++i) {
        CHECK(seq.scans[f].points[i] == seq.scans[0].points[i]);
      }
    }
  }

  SUBCASE("labels integrate to the absolute poses exactly") {
    const SyntheticSequence seq =
        generate_sequence(default_scene(103), default_motion(104), 10);
    const auto rebuilt = integrate_trajectory(seq.poses[0], seq.labels);
    REQUIRE(rebuilt.size() == seq.poses.size());
    for (std::size_t i = 0; i < rebuilt.size(); ++i) {
      CHECK((rebuilt[i].matrix() - seq.poses[i].matrix()).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }

  SUBCASE("constant motion yields constant labels equal to the base") {
    MotionSpec m;
    m.base.p = {0.4, 0, 0};
    m.base.q = {0, 0, 0.005};
    const SyntheticSequence seq = generate_sequence(default_scene(105), m, 6);
    for (const PoseVec6& l : seq.labels) {
      CHECK((l.p - m.base.p).norm() < 1e-12);
      CHECK((l.q - m.base.q).norm() < 1e-12);
    }
  }

  SUBCASE("same seeds reproduce, different seeds differ") {
    const SyntheticSequence a =
        generate_sequence(default_scene(7), default_motion(8), 5);
    const SyntheticSequence b =
        generate_sequence(default_scene(7), default_motion(8), 5);
    REQUIRE(a.scans.size() == b.scans.size());
    for (std::size_t f = 0; f < a.scans.size(); ++f) {
      REQUIRE(a.scans[f].points.size() == b.scans[f].points.size());
      for (std::size_t i = 0; i < a.scans[f].points.size(); ++i) {
        CHECK(a.scans[f].points[i] == b.scans[f].points[i]);
      }
    }
    const SyntheticSequence c =
        generate_sequence(default_scene(9), default_motion(8), 5);
    CHECK(a.scans[0].points != c.scans[0].points);
  }

  SUBCASE("noise perturbs points but never labels") {
    SceneSpec noisy = default_scene(11);
    noisy.noise_sigma = 0.05;
    SceneSpec clean = noisy;
    clean.noise_sigma = 0.0;
    MotionSpec m = default_motion(12);
    const SyntheticSequence sn = generate_sequence(noisy, m, 5);
    const SyntheticSequence sc = generate_sequence(clean, m, 5);
    for (std::size_t i = 0; i < sn.labels.size(); ++i) {
      CHECK((sn.labels[i].p - sc.labels[i].p).norm() == 0.0);
      CHECK((sn.labels[i].q - sc.labels[i].q).norm() == 0.0);
    }
    // same world points, perturbed along the ray by a few sigma
    double max_shift = 0;
    for (std::size_t i = 0; i < sn.scans[0].points.size(); ++i) {
      max_shift = std::max(
          max_shift, (sn.scans[0].points[i] - sc.scans[0].points[i]).norm());
    }
    CHECK(max_shift > 0.0);
    CHECK(max_shift < 0.05 * 6);
  }

  SUBCASE("empty field of view is a typed error") {
    SceneSpec scene;
    Primitive behindless;  // single plane far outside d_max
    behindless.size = {1, 1, 0};
    behindless.pose = Pose(Eigen::Matrix3d::Identity(), {500, 0, 0});
    scene.primitives = {behindless};
    scene.points_per_frame = 100;
    MotionSpec still;
    CHECK_THROWS_AS(generate_sequence(scene, still, 2), DegenerateScene);
  }
}

TEST_CASE("default scene fills the tiny depth image densely") {
  const ProjectionConfig cfg = tiny_projection();
  const SyntheticSequence seq =
      generate_sequence(default_scene(201), default_motion(202), 12, cfg);
  for (const PointCloud& scan : seq.scans) {
    const DepthImage img = project_cloud(scan, cfg);
    const auto nonzero = std::count_if(img.grid.begin(), img.grid.end(),
                                       [](double v) { return v != 0.0; });
    const double frac =
        static_cast<double>(nonzero) / static_cast<double>(img.grid.size());
    CHECK(frac >= 0.3);
  }
}

TEST_CASE("encode_pairs carries the exact labels") {
  const SyntheticSequence seq =
      generate_sequence(default_scene(301), default_motion(302), 6);
  const auto pairs = encode_pairs(seq, tiny_projection());
  REQUIRE(pairs.size() == seq.labels.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].label.p == seq.labels[i].p);
    CHECK(pairs[i].label.q == seq.labels[i].q);
    // first frame of pair i+1 is the second frame of pair i
    if (i > 0) {
      const std::size_t plane = pairs[i].input.translation_input.v.size() / 2;
      for (std::size_t j = 0; j < plane; ++j) {
        CHECK(pairs[i].input.translation_input.v[j] ==
              pairs[i - 1].input.translation_input.v[plane + j]);
      }
    }
  }
}
