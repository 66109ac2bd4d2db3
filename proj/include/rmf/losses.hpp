#pragma once

#include "rmf/observation.hpp"
#include "rmf/skeleton.hpp"

namespace rmf {

// Unweighted loss terms over per-frame joint positions, each returning its
// value together with d(value)/d(positions) for the optimizer to push
// through forward kinematics.
struct PositionLoss {
  double value = 0.0;
  std::vector<std::vector<Vec3>> d_positions;  // [t][j]

  static PositionLoss zeros(int frames, int joints);
};

/// Sum of squared 3D joint residuals over visible entries.
PositionLoss loss_data_3d(const std::vector<JointPositions>& positions,
                          const Observation& obs);

/// Confidence-weighted Geman-McClure reprojection residuals,
/// rho(r; c) = |r|^2 / (|r|^2 + c^2). Points behind the camera are skipped
/// and counted in behind_camera.
PositionLoss loss_data_2d(const std::vector<JointPositions>& positions,
                          const Observation& obs, double gm_scale,
                          int* behind_camera = nullptr);

/// One-sided Chamfer from observed points to joints with a Tukey bisquare
/// weight w(r) = (1 - (r/c)^2)^2 for r < c, else 0.
PositionLoss loss_data_pc(const std::vector<JointPositions>& positions,
                          const Observation& obs, double bisquare_scale);

/// Temporal joint-position smoothness, sum |J_{t+1} - J_t|^2.
PositionLoss loss_smooth(const std::vector<JointPositions>& positions);

/// Bone-length temporal consistency, sum |B_{t+1} - B_t|^2.
PositionLoss loss_bone_length(const Skeleton& skel,
                              const std::vector<JointPositions>& positions);

struct ContactLoss {
  double value = 0.0;
  std::vector<std::vector<Vec3>> d_positions;
  std::vector<PoseVelocity> d_vels;
};

struct ContactWeights {
  double joint = 1.0;   // lambda_cj
  double vel = 1.0;     // lambda_cv
  double height = 1.0;  // lambda_ch
  double delta = 0.05;  // height slack (m)
};

/// Contact losses over designated joints: sticking, angular-velocity damping
/// and the height hinge max(|j_z| - delta, 0), each gated by c[t][i].
ContactLoss loss_contact(const std::vector<JointPositions>& positions,
                         const std::vector<PoseVelocity>& vels,
                         const std::vector<int>& contact_joints,
                         const std::vector<std::vector<double>>& contact_probs,
                         const ContactWeights& w);

/// Leaf joints of the kinematic tree (contact candidates).
std::vector<int> leaf_joints(const Skeleton& skel);

/// Heuristic contact probabilities: 1 when a contact joint is both low
/// (|z| < delta) and slow (position speed < speed_threshold m/s), else 0.
std::vector<std::vector<double>> heuristic_contact_probs(
    const std::vector<JointPositions>& positions,
    const std::vector<int>& contact_joints, double fps, double delta,
    double speed_threshold);

}  // namespace rmf
