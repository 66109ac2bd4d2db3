#pragma once

#include <vector>

#include "rmf/pose.hpp"

namespace rmf {

using JointPositions = std::vector<Vec3>;

// Kinematic tree. Joint 0 is the root (parent -1). Bone offsets are the
// rest-pose child positions in the parent frame, scaled per-bone by beta.
struct Skeleton {
  std::vector<int> parent;
  std::vector<Vec3> offsets;
  std::vector<double> beta;

  int num_joints() const { return static_cast<int>(parent.size()); }
  void validate() const;

  /// Serial chain of k joints with unit +y offsets, beta = 1.
  static Skeleton chain(int k);
};

struct FkResult {
  JointPositions positions;
  std::vector<Mat3> global_rotations;
};

FkResult forward_kinematics_full(const Skeleton& skel, const Vec3& t_r,
                                 const Pose& pose);

JointPositions forward_kinematics(const Skeleton& skel, const Vec3& t_r,
                                  const Pose& pose);

/// Lengths of the K-1 parent-child segments, in child-index order 1..K-1.
std::vector<double> bone_lengths(const Skeleton& skel,
                                 const JointPositions& pts);

/// Backpropagates d(loss)/d(joint positions) to the pose tangent (per-joint
/// axial coordinates of a right-perturbation), the root translation, and the
/// per-bone scales.
struct FkGradient {
  PoseVelocity d_pose;       // dL/d omega_k
  Vec3 d_t_r;                // dL/d t_r
  std::vector<double> d_beta;
};

FkGradient fk_backward(const Skeleton& skel, const Pose& pose,
                       const FkResult& fk,
                       const std::vector<Vec3>& d_positions);

}  // namespace rmf
