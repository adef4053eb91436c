#include "deeppco/pose.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace deeppco {

namespace {

constexpr double kOrthoDrift = 1e-9;
constexpr double kGimbalTol = 1e-9;

Eigen::Matrix3d gram_schmidt(const Eigen::Matrix3d& m) {
  Eigen::Vector3d c0 = m.col(0).normalized();
  Eigen::Vector3d c1 = (m.col(1) - c0 * c0.dot(m.col(1))).normalized();
  Eigen::Vector3d c2 = c0.cross(c1);
  Eigen::Matrix3d r;
  r.col(0) = c0;
  r.col(1) = c1;
  r.col(2) = c2;
  return r;
}

}  // namespace

const char* to_string(EulerConvention conv) {
  switch (conv) {
    case EulerConvention::IntrinsicZYX:
      return "intrinsic-zyx";
  }
  return "unknown";
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);  // (-pi, pi], remainder gives [-pi, pi]
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rot_(rotation), trans_(translation) {
  const double drift =
      (rot_.transpose() * rot_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (drift > kOrthoDrift) rot_ = gram_schmidt(rot_);
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rot_;
  m.topRightCorner<3, 1>() = trans_;
  return m;
}

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  return Pose(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(),
              a.rotation() * b.translation() + a.translation());
}

Pose invert(const Pose& a) {
  Eigen::Matrix3d rt = a.rotation().transpose();
  return Pose(rt, -(rt * a.translation()));
}

Pose relative_pose(const Pose& from, const Pose& to) {
  return compose(invert(from), to);
}

Eigen::Matrix3d euler_to_rotation(const Eigen::Vector3d& q, EulerConvention conv) {
  (void)conv;  // single convention for now
  const Eigen::AngleAxisd roll(q[0], Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd pitch(q[1], Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd yaw(q[2], Eigen::Vector3d::UnitZ());
  return (yaw * pitch * roll).toRotationMatrix();
}

Eigen::Vector3d rotation_to_euler(const Eigen::Matrix3d& r, EulerConvention conv,
                                  bool* gimbal_lock) {
  (void)conv;
  if (gimbal_lock) *gimbal_lock = false;

  // R = Rz(yaw) Ry(pitch) Rx(roll) => R(2,0) = -sin(pitch)
  const double sp = -r(2, 0);
  double roll, pitch, yaw;
  if (std::abs(std::abs(sp) - 1.0) < kGimbalTol) {
    // Degenerate: only yaw±roll is observable. Tie-break: roll = 0.
    if (gimbal_lock) *gimbal_lock = true;
    pitch = std::copysign(M_PI / 2.0, sp);
    roll = 0.0;
    // with roll = 0: R(0,1) = -sin(yaw), R(1,1) = cos(yaw)
    yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    pitch = std::asin(std::clamp(sp, -1.0, 1.0));
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  }
  return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

Eigen::Vector3d quaternion_to_euler(double w, double x, double y, double z,
                                    EulerConvention conv) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw NonUnitQuaternion("quaternion norm " + std::to_string(norm) +
                            " deviates from 1 beyond 1e-6");
  }
  const Eigen::Quaterniond quat(w, x, y, z);
  return rotation_to_euler(quat.normalized().toRotationMatrix(), conv);
}

PoseVec6 pose_to_vec6(const Pose& a, EulerConvention conv, bool* gimbal_lock) {
  return {a.translation(), rotation_to_euler(a.rotation(), conv, gimbal_lock)};
}

Pose vec6_to_pose(const PoseVec6& v, EulerConvention conv) {
  return Pose(euler_to_rotation(v.q, conv), v.p);
}

std::vector<Pose> integrate_trajectory(const Pose& start,
                                       std::span<const PoseVec6> rels,
                                       EulerConvention conv) {
  std::vector<Pose> out;
  out.reserve(rels.size() + 1);
  out.push_back(start);
  for (const PoseVec6& rel : rels) {
    out.push_back(compose(out.back(), vec6_to_pose(rel, conv)));
  }
  return out;
}

}  // namespace deeppco
