#pragma once

#include <vector>

#include "rmf/pose.hpp"
#include "rmf/skeleton.hpp"

namespace rmf {

struct MotionState {
  Vec3 t_r = Vec3::Zero();
  Pose pose;
  PoseVelocity vel;
  PoseAcceleration acc;
};

struct MotionSequence {
  double fps = 30.0;
  std::vector<MotionState> states;

  int num_frames() const { return static_cast<int>(states.size()); }
  int num_joints() const {
    return states.empty() ? 0 : static_cast<int>(states[0].pose.size());
  }
  std::vector<Pose> poses() const;
};

enum class VelocityScheme { kLogCentral, kMatrixCentral };
enum class AccelScheme { kCentral, kLogTransport };

/// Body-frame angular velocity per frame. Interior frames use central
/// differences, endpoints one-sided first-order.
std::vector<PoseVelocity> estimate_velocity(const std::vector<Pose>& poses,
                                            double fps,
                                            VelocityScheme scheme);

/// Angular acceleration per frame from per-frame velocities. kLogTransport
/// parallel-transports neighbor velocities to the center frame's tangent
/// space before differencing; the poses are required for that scheme only.
std::vector<PoseAcceleration> estimate_acceleration(
    const std::vector<PoseVelocity>& vels, double fps, AccelScheme scheme,
    const std::vector<Pose>* poses = nullptr);

/// Maps the whole sequence by the inverse root transform of frame 0 so that
/// the first frame has identity root rotation and zero translation.
MotionSequence canonicalize(const MotionSequence& seq);

/// Fills velocities (log-central) and accelerations (central) from poses.
MotionSequence rebuild_states(const std::vector<Pose>& poses,
                              const std::vector<Vec3>& roots, double fps);

/// Bi-invariant-metric parallel transport of a body-frame tangent vector
/// from `from` to `to` along the connecting geodesic.
Vec3 parallel_transport(const Mat3& from, const Mat3& to, const Vec3& w);

}  // namespace rmf
