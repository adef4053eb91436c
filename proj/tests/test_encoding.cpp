#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "deeppco/encoding.hpp"

using namespace deeppco;

namespace {

std::mt19937_64 rng(7);

PointCloud random_cloud(std::size_t n, double radius = 60.0) {
  PointCloud pc;
  std::uniform_real_distribution<double> u(-radius, radius);
  while (pc.points.size() < n) {
    Eigen::Vector3d p{u(rng), u(rng), u(rng) * 0.2};
    if (p.norm() > 1e-3) pc.points.push_back(p);
  }
  return pc;
}

// scalar evaluation of the projection equations plus the wrap rule
std::optional<CellHit> scalar_oracle(const Eigen::Vector3d& p,
                                     const ProjectionConfig& cfg) {
  const double d = p.norm();
  double theta = std::atan2(p.y(), p.x());
  if (theta < 0) theta += 2 * M_PI;
  const double phi = std::asin(p.z() / d);
  if (phi < cfg.phi_min || phi >= cfg.phi_max) return std::nullopt;
  int r = static_cast<int>(std::floor(theta / cfg.delta_theta()));
  if (r >= cfg.width) r = cfg.width - 1;
  const int c = static_cast<int>(std::floor((phi - cfg.phi_min) / cfg.delta_phi()));
  if (c < 0 || c >= cfg.height) return std::nullopt;
  return CellHit{r, c, d};
}

}  // namespace

TEST_CASE("project_point forced examples") {
  ProjectionConfig cfg;
  cfg.width = 360;
  cfg.height = 64;
  cfg.phi_min = -0.3;
  cfg.phi_max = 0.3;

  const auto fwd = project_point(1, 0, 0, cfg);
  REQUIRE(fwd.has_value());
  CHECK(fwd->r == 0);
  CHECK(fwd->c == static_cast<int>(std::floor(-cfg.phi_min / cfg.delta_phi())));
  CHECK(fwd->range == doctest::Approx(1.0));

  const auto left = project_point(0, 1, 0, cfg);
  REQUIRE(left.has_value());
  CHECK(left->r == 90);

  // negative azimuth wraps before binning
  const auto right = project_point(0, -1, 0, cfg);
  REQUIRE(right.has_value());
  CHECK(right->r == 270);
}

TEST_CASE("out-of-fov elevation is rejected") {
  const ProjectionConfig cfg = tiny_projection();
  CHECK_FALSE(project_point(1, 0, 10, cfg).has_value());   // far above
  CHECK_FALSE(project_point(1, 0, -10, cfg).has_value());  // far below
}

TEST_CASE("binning consistency on 1e5 random points") {
  const ProjectionConfig cfg = tiny_projection();
  const PointCloud pc = random_cloud(100000);
  for (const Eigen::Vector3d& p : pc.points) {
    const auto hit = project_point(p.x(), p.y(), p.z(), cfg);
    const auto want = scalar_oracle(p, cfg);
    REQUIRE(hit.has_value() == want.has_value());
    if (!hit) continue;
    CHECK(hit->r == want->r);
    CHECK(hit->c == want->c);
    double theta = std::atan2(p.y(), p.x());
    if (theta < 0) theta += 2 * M_PI;
    CHECK(hit->r * cfg.delta_theta() <= theta + 1e-12);
    CHECK(theta < (hit->r + 1) * cfg.delta_theta() + 1e-12);
    const double phi = std::asin(p.z() / p.norm());
    CHECK(cfg.phi_min + hit->c * cfg.delta_phi() <= phi + 1e-12);
    CHECK(phi < cfg.phi_min + (hit->c + 1) * cfg.delta_phi() + 1e-12);
  }
}

TEST_CASE("normalize_depth") {
  const ProjectionConfig cfg = tiny_projection();
  CHECK(normalize_depth(1e-9, cfg) == doctest::Approx(255.0));
  CHECK(normalize_depth(cfg.d_max, cfg) == 0.0);
  CHECK(normalize_depth(cfg.d_max / 2, cfg) == doctest::Approx(127.5));
  CHECK(normalize_depth(cfg.d_max * 10, cfg) == 0.0);  // clamped

  double prev = 256.0;
  for (double d = 0.5; d <= cfg.d_max; d += 0.5) {
    const double v = normalize_depth(d, cfg);
    CHECK(v < prev);  // strictly decreasing
    prev = v;
  }
}

TEST_CASE("project_cloud") {
  const ProjectionConfig cfg = tiny_projection();

  SUBCASE("empty cloud throws") {
    CHECK_THROWS_AS(project_cloud(PointCloud{}, cfg), EmptyCloud);
  }

  SUBCASE("point at d_max stays a zero cell") {
    PointCloud pc;
    pc.points.push_back({cfg.d_max, 0, 0});
    const DepthImage img = project_cloud(pc, cfg);
    CHECK(*std::max_element(img.grid.begin(), img.grid.end()) == 0.0);
  }

  SUBCASE("nearest point wins a collision") {
    PointCloud pc;
    pc.points.push_back({50, 0, 0});
    pc.points.push_back({5, 0, 0});
    EncodeStats stats;
    const DepthImage img = project_cloud(pc, cfg, &stats);
    const auto hit = project_point(5, 0, 0, cfg);
    CHECK(img.at(hit->c, hit->r) == doctest::Approx(normalize_depth(5, cfg)));
    CHECK(stats.collisions == 1);
    CHECK(stats.in_fov == 2);
  }

  SUBCASE("K distinct cells give exactly K nonzero cells") {
    PointCloud pc;
    const int k = 20;
    for (int i = 0; i < k; ++i) {
      const double theta = (i + 0.5) * cfg.delta_theta();
      pc.points.push_back({10 * std::cos(theta), 10 * std::sin(theta), 0});
    }
    const DepthImage img = project_cloud(pc, cfg);
    const auto nonzero = std::count_if(img.grid.begin(), img.grid.end(),
                                       [](double v) { return v != 0.0; });
    CHECK(nonzero == k);
  }

  SUBCASE("origin points are dropped and counted") {
    PointCloud pc;
    pc.points.push_back({0, 0, 0});
    pc.points.push_back({10, 0, 0});
    EncodeStats stats;
    project_cloud(pc, cfg, &stats);
    CHECK(stats.dropped_origin == 1);
    CHECK(stats.in_fov == 1);
  }
}

TEST_CASE("nearest-wins against brute-force per-cell oracle") {
  const ProjectionConfig cfg = tiny_projection();
  const PointCloud pc = random_cloud(5000);
  const DepthImage img = project_cloud(pc, cfg);

  std::map<std::pair<int, int>, double> min_range;
  for (const Eigen::Vector3d& p : pc.points) {
    if (const auto hit = project_point(p.x(), p.y(), p.z(), cfg)) {
      auto [it, fresh] = min_range.try_emplace({hit->c, hit->r}, hit->range);
      if (!fresh) it->second = std::min(it->second, hit->range);
    }
  }
  for (const auto& [cell, range] : min_range) {
    CHECK(img.at(cell.first, cell.second) ==
          doctest::Approx(normalize_depth(range, cfg)).epsilon(1e-12));
  }
  const auto nonzero = std::count_if(img.grid.begin(), img.grid.end(),
                                     [](double v) { return v != 0.0; });
  // cells at exactly d_max normalize to zero; none expected at radius 60
  CHECK(static_cast<std::size_t>(nonzero) == min_range.size());
}

TEST_CASE("encoding is order-independent") {
  const ProjectionConfig cfg = tiny_projection();
  PointCloud pc = random_cloud(5000);
  const DepthImage a = project_cloud(pc, cfg);
  std::shuffle(pc.points.begin(), pc.points.end(), rng);
  const DepthImage b = project_cloud(pc, cfg);
  CHECK(a.grid == b.grid);  // bit-identical
}

TEST_CASE("stack_pair") {
  const ProjectionConfig cfg = tiny_projection();

  SUBCASE("config mismatch throws") {
    DepthImage a(cfg), b(full_projection());
    CHECK_THROWS_AS(stack_pair(a, b), ConfigMismatch);
  }

  SUBCASE("zero images give zero tensors of the right shape") {
    DepthImage z(cfg);
    const FramePairInput in = stack_pair(z, z);
    CHECK(in.translation_input.shape == std::vector<int>{2, cfg.height, cfg.width});
    CHECK(in.orientation_input.shape == std::vector<int>{6, cfg.height, cfg.width});
    for (double v : in.translation_input.v) CHECK(v == 0.0);
    for (double v : in.orientation_input.v) CHECK(v == 0.0);
  }

  SUBCASE("channels are replicated and frame order preserved") {
    const DepthImage a = project_cloud(random_cloud(2000), cfg);
    const DepthImage b = project_cloud(random_cloud(2000), cfg);
    const FramePairInput in = stack_pair(a, b);
    const std::size_t plane = static_cast<std::size_t>(cfg.height) * cfg.width;
    for (std::size_t i = 0; i < plane; ++i) {
      CHECK(in.translation_input.v[i] == a.grid[i] / 255.0);
      CHECK(in.translation_input.v[plane + i] == b.grid[i] / 255.0);
      // bit-identical replication
      CHECK(in.orientation_input.v[i] == in.orientation_input.v[plane + i]);
      CHECK(in.orientation_input.v[i] == in.orientation_input.v[2 * plane + i]);
      CHECK(in.orientation_input.v[3 * plane + i] ==
            in.orientation_input.v[4 * plane + i]);
      CHECK(in.orientation_input.v[i] == in.translation_input.v[i]);
      CHECK(in.orientation_input.v[3 * plane + i] ==
            in.translation_input.v[plane + i]);
    }
  }
}

TEST_CASE("pgm export") {
  const ProjectionConfig cfg = tiny_projection();
  const DepthImage img = project_cloud(random_cloud(2000), cfg);
  const auto path = std::filesystem::temp_directory_path() / "deeppco_test.pgm";
  write_pgm(img, path.string());

  std::ifstream f(path, std::ios::binary);
  std::string magic;
  int w, h, maxval;
  f >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == cfg.width);
  CHECK(h == cfg.height);
  CHECK(maxval == 255);
  f.get();  // single whitespace after header
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  CHECK(f.gcount() == static_cast<std::streamsize>(bytes.size()));
  // top row of the file is the highest elevation row
  for (int r = 0; r < w; ++r) {
    CHECK(bytes[static_cast<std::size_t>(r)] ==
          static_cast<unsigned char>(std::lround(img.at(cfg.height - 1, r))));
  }
  std::filesystem::remove(path);
}
