#pragma once

#include <vector>

#include "rmf/so3.hpp"

namespace rmf {

// A K-joint articulated pose on SO(3)^K and its tangent representations.
// Velocities and accelerations are stored as per-joint axial vectors in the
// body frame (left-invariant convention, Omega = R^T Rdot).
using Pose = std::vector<Mat3>;
using PoseVelocity = std::vector<Vec3>;
using PoseAcceleration = std::vector<Vec3>;
using PoseTangent = std::vector<Mat3>;

Pose identity_pose(int k);
PoseVelocity zero_velocity(int k);

/// L1 product metric: sum of per-joint geodesic distances.
double pose_distance(const Pose& a, const Pose& b);

/// Componentwise Exp_{R_k}(hat(step_k)).
Pose pose_exp(const Pose& base, const PoseVelocity& step);

/// Componentwise vee(log(base_k^T target_k)).
PoseVelocity pose_log(const Pose& base, const Pose& target);

/// Componentwise egrad2rgrad.
PoseTangent pose_rgrad(const Pose& pose, const std::vector<Mat3>& egrads);

/// Euclidean norms over the flattened axial vectors.
double velocity_norm(const PoseVelocity& v);

Pose random_pose(std::mt19937_64& rng, int k);

void check_same_k(std::size_t a, std::size_t b);

}  // namespace rmf
