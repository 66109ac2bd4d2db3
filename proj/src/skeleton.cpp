#include "rmf/skeleton.hpp"

#include <stdexcept>

namespace rmf {

void Skeleton::validate() const {
  const int k = num_joints();
  if (k < 1 || static_cast<int>(offsets.size()) != k ||
      static_cast<int>(beta.size()) != k) {
    throw std::invalid_argument("skeleton: inconsistent array sizes");
  }
  if (parent[0] != -1) {
    throw std::invalid_argument("skeleton: joint 0 must be the root");
  }
  for (int i = 1; i < k; ++i) {
    // Topological joint order; also rules out cycles.
    if (parent[i] < 0 || parent[i] >= i) {
      throw std::invalid_argument(
          "skeleton: parent indices must precede their children");
    }
    if (offsets[i].norm() == 0.0) {
      throw std::invalid_argument("skeleton: zero bone offset");
    }
  }
  for (double b : beta) {
    if (!(b > 0.0)) throw std::invalid_argument("skeleton: beta must be > 0");
  }
}

Skeleton Skeleton::chain(int k) {
  Skeleton s;
  s.parent.resize(k);
  s.offsets.assign(k, Vec3(0.0, 1.0, 0.0));
  s.beta.assign(k, 1.0);
  s.parent[0] = -1;
  s.offsets[0] = Vec3::Zero();
  for (int i = 1; i < k; ++i) s.parent[i] = i - 1;
  return s;
}

FkResult forward_kinematics_full(const Skeleton& skel, const Vec3& t_r,
                                 const Pose& pose) {
  skel.validate();
  const int k = skel.num_joints();
  check_same_k(pose.size(), skel.parent.size());
  FkResult out;
  out.positions.resize(k);
  out.global_rotations.resize(k);
  out.positions[0] = t_r;
  out.global_rotations[0] = pose[0];
  for (int i = 1; i < k; ++i) {
    const int p = skel.parent[i];
    out.positions[i] = out.positions[p] +
                       out.global_rotations[p] * (skel.beta[i] * skel.offsets[i]);
    out.global_rotations[i] = out.global_rotations[p] * pose[i];
  }
  return out;
}

JointPositions forward_kinematics(const Skeleton& skel, const Vec3& t_r,
                                  const Pose& pose) {
  return forward_kinematics_full(skel, t_r, pose).positions;
}

std::vector<double> bone_lengths(const Skeleton& skel,
                                 const JointPositions& pts) {
  std::vector<double> out;
  out.reserve(skel.num_joints() - 1);
  for (int i = 1; i < skel.num_joints(); ++i) {
    out.push_back((pts[i] - pts[skel.parent[i]]).norm());
  }
  return out;
}

FkGradient fk_backward(const Skeleton& skel, const Pose& pose,
                       const FkResult& fk,
                       const std::vector<Vec3>& d_positions) {
  const int k = skel.num_joints();
  check_same_k(d_positions.size(), skel.parent.size());

  // Subtree accumulators: sums over each joint's descendants (self included)
  // of the position gradients and of p_j x g_j.
  std::vector<Vec3> grad_sum(d_positions);
  std::vector<Vec3> moment_sum(k);
  for (int i = 0; i < k; ++i) {
    moment_sum[i] = fk.positions[i].cross(d_positions[i]);
  }
  for (int i = k - 1; i >= 1; --i) {
    grad_sum[skel.parent[i]] += grad_sum[i];
    moment_sum[skel.parent[i]] += moment_sum[i];
  }

  FkGradient g;
  g.d_pose.resize(k);
  g.d_beta.assign(k, 0.0);
  g.d_t_r = grad_sum[0];
  for (int i = 0; i < k; ++i) {
    // d/d omega_i of all descendant positions rotating about joint i.
    g.d_pose[i] = fk.global_rotations[i].transpose() *
                  (moment_sum[i] - fk.positions[i].cross(grad_sum[i]));
  }
  for (int i = 1; i < k; ++i) {
    const Vec3 bone_dir =
        fk.global_rotations[skel.parent[i]] * skel.offsets[i];
    g.d_beta[i] = bone_dir.dot(grad_sum[i]);
  }
  return g;
}

}  // namespace rmf
