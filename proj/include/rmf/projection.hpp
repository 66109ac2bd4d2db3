#pragma once

#include <optional>
#include <string>

#include "rmf/field.hpp"
#include "rmf/motion.hpp"

namespace rmf {

// Normalized-gradient descent onto the zero level set: each iteration moves
// by step * f(x) along -grad/|grad|, with backtracking halving on the step
// whenever f fails to decrease.
struct ProjectorConfig {
  double step = 1.0;
  int max_iters = 50;
  double eps = 1e-3;
  double shrink = 0.5;
  int max_backtracks = 20;
  bool enabled = true;
};

struct ProjectionTrace {
  std::vector<double> values;        // f at every visited iterate
  std::vector<double> step_lengths;  // accepted step length per iteration
  bool zero_gradient = false;
};

Pose project_pose(const Pose& pose, const DistanceField& field,
                  const ProjectorConfig& cfg,
                  ProjectionTrace* trace = nullptr);

PoseVelocity project_velocity(const PoseVelocity& vel,
                              const DistanceField& field,
                              const Pose& conditioning_pose,
                              const ProjectorConfig& cfg,
                              ProjectionTrace* trace = nullptr);

PoseAcceleration project_acceleration(const PoseAcceleration& acc,
                                      const DistanceField& field,
                                      const Pose& conditioning_pose,
                                      const PoseVelocity& conditioning_vel,
                                      const ProjectorConfig& cfg,
                                      ProjectionTrace* trace = nullptr);

struct FieldSet {
  const DistanceField* pose = nullptr;
  const DistanceField* velocity = nullptr;
  const DistanceField* acceleration = nullptr;
};

struct StageConfigs {
  ProjectorConfig pose;
  ProjectorConfig velocity;
  ProjectorConfig acceleration;
};

/// Three-stage projection: pose first, then velocity conditioned on the
/// projected pose, then acceleration conditioned on both.
MotionState project_state(const MotionState& state, const FieldSet& fields,
                          const StageConfigs& cfg,
                          std::vector<ProjectionTrace>* traces = nullptr);

struct IntegratorConfig {
  double lambda = 1.0 / 30.0;  // velocity-update step (s)
  double alpha = 1.0 / 30.0;   // pose-update step (s)
  ProjectorConfig pose_proj;
  ProjectorConfig velocity_proj;
};

/// Projected geometric Euler rollout. Produces T+1 states from T
/// accelerations; velocities/accelerations of the result are rebuilt from
/// the integrated poses.
MotionSequence integrate(const Pose& pose0, const PoseVelocity& vel0,
                         const std::vector<PoseAcceleration>& accs,
                         const FieldSet& fields, const IntegratorConfig& cfg,
                         double fps);

std::string trace_to_json(const ProjectionTrace& trace);

}  // namespace rmf
