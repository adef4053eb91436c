#include "deeppco/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace deeppco {

ProjectionConfig tiny_projection() {
  ProjectionConfig cfg;
  cfg.width = 64;
  cfg.height = 16;
  return cfg;
}

ProjectionConfig full_projection() { return ProjectionConfig{}; }

std::optional<CellHit> project_point(double x, double y, double z,
                                     const ProjectionConfig& cfg) {
  const double d = std::sqrt(x * x + y * y + z * z);
  double theta = std::atan2(y, x);
  if (theta < 0) theta += 2.0 * M_PI;
  const double phi = std::asin(z / d);
  if (phi < cfg.phi_min || phi >= cfg.phi_max) return std::nullopt;

  int r = static_cast<int>(std::floor(theta / cfg.delta_theta()));
  if (r >= cfg.width) r = cfg.width - 1;  // theta == 2π after rounding
  const int c = static_cast<int>(std::floor((phi - cfg.phi_min) / cfg.delta_phi()));
  if (c < 0 || c >= cfg.height) return std::nullopt;
  return CellHit{r, c, d};
}

double normalize_depth(double d, const ProjectionConfig& cfg) {
  return 255.0 * (1.0 - std::min(d, cfg.d_max) / cfg.d_max);
}

DepthImage project_cloud(const PointCloud& pc, const ProjectionConfig& cfg,
                         EncodeStats* stats) {
  if (pc.points.empty()) throw EmptyCloud("project_cloud: empty point cloud");

  DepthImage img(cfg);
  // per-cell minimum range; normalized at the end
  std::vector<double> best(img.grid.size(),
                           std::numeric_limits<double>::infinity());
  EncodeStats st;
  st.total = pc.points.size();
  for (const Eigen::Vector3d& p : pc.points) {
    if (p.isZero(0.0)) {
      ++st.dropped_origin;  // azimuth undefined at the origin
      continue;
    }
    const auto hit = project_point(p.x(), p.y(), p.z(), cfg);
    if (!hit) {
      ++st.out_of_fov;
      continue;
    }
    ++st.in_fov;
    double& cell = best[static_cast<std::size_t>(hit->c) * cfg.width + hit->r];
    if (std::isfinite(cell)) ++st.collisions;
    if (hit->range < cell) cell = hit->range;
  }
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (std::isfinite(best[i])) img.grid[i] = normalize_depth(best[i], cfg);
  }
  if (stats) *stats = st;
  return img;
}

FramePairInput stack_pair(const DepthImage& prev, const DepthImage& curr) {
  if (!(prev.config == curr.config)) {
    throw ConfigMismatch("stack_pair: projection configs differ");
  }
  const int h = prev.config.height;
  const int w = prev.config.width;

  FramePairInput out;
  out.translation_input = Tensor({2, h, w});
  out.orientation_input = Tensor({6, h, w});

  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < plane; ++i) {
    const double a = prev.grid[i] / 255.0;
    const double b = curr.grid[i] / 255.0;
    out.translation_input.v[i] = a;
    out.translation_input.v[plane + i] = b;
    for (int rep = 0; rep < 3; ++rep) {
      out.orientation_input.v[rep * plane + i] = a;
      out.orientation_input.v[(3 + rep) * plane + i] = b;
    }
  }
  return out;
}

void write_pgm(const DepthImage& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "P5\n" << img.config.width << " " << img.config.height << "\n255\n";
  // top row = phi_max
  for (int c = img.config.height - 1; c >= 0; --c) {
    for (int r = 0; r < img.config.width; ++r) {
      const double v = std::clamp(img.at(c, r), 0.0, 255.0);
      const unsigned char byte = static_cast<unsigned char>(std::lround(v));
      f.put(static_cast<char>(byte));
    }
  }
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace deeppco
