#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "deeppco/errors.hpp"

namespace deeppco {

// Euler angles are stored as q = (roll, pitch, yaw) in radians.
// IntrinsicZYX means R = Rz(yaw) * Ry(pitch) * Rx(roll), the usual
// vehicle convention. One convention is active per run; it is recorded
// alongside any exported Euler-valued output.
enum class EulerConvention { IntrinsicZYX };

inline constexpr EulerConvention kDefaultEulerConvention =
    EulerConvention::IntrinsicZYX;

const char* to_string(EulerConvention conv);

// 6-DOF pose vector: 3 translation components (m) + 3 Euler angles (rad).
struct PoseVec6 {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d q = Eigen::Vector3d::Zero();
};

// Rigid transform. The rotation block is kept orthonormal: the
// constructor re-orthonormalizes (Gram-Schmidt) whenever drift exceeds
// 1e-9, so long composition chains stay valid.
class Pose {
 public:
  Pose() : rot_(Eigen::Matrix3d::Identity()), trans_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rot_; }
  const Eigen::Vector3d& translation() const { return trans_; }

  Eigen::Matrix4d matrix() const;
  static Pose from_matrix(const Eigen::Matrix4d& m);

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const {
    return rot_ * point + trans_;
  }

 private:
  Eigen::Matrix3d rot_;
  Eigen::Vector3d trans_;
};

// Composition convention (fixed project-wide): compose(a, b) applies b
// first, then a — column vectors, left multiply, world = parent ∘ child.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);

// The transform taking `from` to `to`: compose(from, result) == to.
Pose relative_pose(const Pose& from, const Pose& to);

Eigen::Matrix3d euler_to_rotation(const Eigen::Vector3d& q,
                                  EulerConvention conv = kDefaultEulerConvention);

// Inverse of euler_to_rotation away from gimbal lock. When |pitch| is
// within 1e-6 of π/2 the decomposition is degenerate; roll is forced to
// 0 and *gimbal_lock (if given) is set. Components are in (−π, π].
Eigen::Vector3d rotation_to_euler(const Eigen::Matrix3d& rotation,
                                  EulerConvention conv = kDefaultEulerConvention,
                                  bool* gimbal_lock = nullptr);

// Throws NonUnitQuaternion if |norm − 1| > 1e-6.
Eigen::Vector3d quaternion_to_euler(double w, double x, double y, double z,
                                    EulerConvention conv = kDefaultEulerConvention);

PoseVec6 pose_to_vec6(const Pose& a,
                      EulerConvention conv = kDefaultEulerConvention,
                      bool* gimbal_lock = nullptr);
Pose vec6_to_pose(const PoseVec6& v,
                  EulerConvention conv = kDefaultEulerConvention);

// Chains relative steps onto `start`. Output has len(rels)+1 poses,
// output[0] == start.
std::vector<Pose> integrate_trajectory(const Pose& start,
                                       std::span<const PoseVec6> rels,
                                       EulerConvention conv = kDefaultEulerConvention);

// Wrap an angle into (−π, π].
double wrap_angle(double a);

}  // namespace deeppco
