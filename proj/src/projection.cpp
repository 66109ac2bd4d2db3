#include "rmf/projection.hpp"

#include <stdexcept>

#include <json.hpp>

namespace rmf {

namespace {

void record(ProjectionTrace* trace, double value) {
  if (trace != nullptr) trace->values.push_back(value);
}

void record_step(ProjectionTrace* trace, double length) {
  if (trace != nullptr) trace->step_lengths.push_back(length);
}

void flag_zero_grad(ProjectionTrace* trace) {
  if (trace != nullptr) trace->zero_gradient = true;
}

}  // namespace

Pose project_pose(const Pose& pose, const DistanceField& field,
                  const ProjectorConfig& cfg, ProjectionTrace* trace) {
  if (!cfg.enabled) return pose;
  Pose current = pose;
  PoseVelocity g;
  double value = field.pose_value_grad(current, g);
  record(trace, value);
  for (int it = 0; it < cfg.max_iters && value >= cfg.eps; ++it) {
    const double gnorm = velocity_norm(g);
    if (gnorm < 1e-12) {
      flag_zero_grad(trace);
      break;
    }
    double step = cfg.step;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      PoseVelocity delta(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) {
        delta[j] = -(step * value / gnorm) * g[j];
      }
      Pose candidate = pose_exp(current, delta);
      PoseVelocity g_new;
      const double value_new = field.pose_value_grad(candidate, g_new);
      if (value_new < value) {
        current = std::move(candidate);
        g = std::move(g_new);
        record_step(trace, step * value);
        value = value_new;
        record(trace, value);
        accepted = true;
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;
  }
  return current;
}

namespace {

Eigen::VectorXd project_linear(const Eigen::VectorXd& main,
                               const DistanceField& field,
                               const Eigen::VectorXd& conditioning,
                               const ProjectorConfig& cfg,
                               ProjectionTrace* trace) {
  Eigen::VectorXd x(main.size() + conditioning.size());
  x << main, conditioning;
  const int dim = static_cast<int>(main.size());

  double value = field.eval(x);
  record(trace, value);
  for (int it = 0; it < cfg.max_iters && value >= cfg.eps; ++it) {
    const Eigen::VectorXd g = field.grad(x).head(dim);
    const double gnorm = g.norm();
    if (gnorm < 1e-12) {
      flag_zero_grad(trace);
      break;
    }
    double step = cfg.step;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      Eigen::VectorXd candidate = x;
      candidate.head(dim) -= (step * value / gnorm) * g;
      const double value_new = field.eval(candidate);
      if (value_new < value) {
        x = std::move(candidate);
        record_step(trace, step * value);
        value = value_new;
        record(trace, value);
        accepted = true;
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;
  }
  return x.head(dim);
}

}  // namespace

PoseVelocity project_velocity(const PoseVelocity& vel,
                              const DistanceField& field,
                              const Pose& conditioning_pose,
                              const ProjectorConfig& cfg,
                              ProjectionTrace* trace) {
  if (!cfg.enabled) return vel;
  Eigen::VectorXd cond(0);
  if (field.conditioning_dim() > 0) cond = encode_pose(conditioning_pose);
  const Eigen::VectorXd out =
      project_linear(encode_vecs(vel), field, cond, cfg, trace);
  return decode_vecs(out);
}

PoseAcceleration project_acceleration(const PoseAcceleration& acc,
                                      const DistanceField& field,
                                      const Pose& conditioning_pose,
                                      const PoseVelocity& conditioning_vel,
                                      const ProjectorConfig& cfg,
                                      ProjectionTrace* trace) {
  if (!cfg.enabled) return acc;
  Eigen::VectorXd cond(0);
  if (field.conditioning_dim() > 0) {
    cond.resize(4 * conditioning_pose.size() + 3 * conditioning_vel.size());
    cond << encode_pose(conditioning_pose), encode_vecs(conditioning_vel);
  }
  const Eigen::VectorXd out =
      project_linear(encode_vecs(acc), field, cond, cfg, trace);
  return decode_vecs(out);
}

MotionState project_state(const MotionState& state, const FieldSet& fields,
                          const StageConfigs& cfg,
                          std::vector<ProjectionTrace>* traces) {
  MotionState out = state;
  ProjectionTrace tp, tv, ta;
  if (fields.pose != nullptr && cfg.pose.enabled) {
    out.pose = project_pose(out.pose, *fields.pose, cfg.pose, &tp);
  }
  if (fields.velocity != nullptr && cfg.velocity.enabled) {
    out.vel =
        project_velocity(out.vel, *fields.velocity, out.pose, cfg.velocity, &tv);
  }
  if (fields.acceleration != nullptr && cfg.acceleration.enabled) {
    out.acc = project_acceleration(out.acc, *fields.acceleration, out.pose,
                                   out.vel, cfg.acceleration, &ta);
  }
  if (traces != nullptr) *traces = {tp, tv, ta};
  return out;
}

MotionSequence integrate(const Pose& pose0, const PoseVelocity& vel0,
                         const std::vector<PoseAcceleration>& accs,
                         const FieldSet& fields, const IntegratorConfig& cfg,
                         double fps) {
  check_same_k(pose0.size(), vel0.size());
  const int t_max = static_cast<int>(accs.size());
  std::vector<Pose> poses = {pose0};
  std::vector<PoseVelocity> vels = {vel0};
  for (int t = 1; t <= t_max; ++t) {
    // Velocities first, then the pose update with the previous velocity.
    PoseVelocity vel(vels.back().size());
    for (std::size_t j = 0; j < vel.size(); ++j) {
      vel[j] = vels[t - 1][j] + cfg.lambda * accs[t - 1][j];
    }
    if (fields.velocity != nullptr && cfg.velocity_proj.enabled) {
      vel = project_velocity(vel, *fields.velocity, poses[t - 1],
                             cfg.velocity_proj);
    }
    PoseVelocity step(vels[t - 1].size());
    for (std::size_t j = 0; j < step.size(); ++j) {
      step[j] = cfg.alpha * vels[t - 1][j];
    }
    Pose pose = pose_exp(poses[t - 1], step);
    if (fields.pose != nullptr && cfg.pose_proj.enabled) {
      pose = project_pose(pose, *fields.pose, cfg.pose_proj);
    }
    poses.push_back(std::move(pose));
    vels.push_back(std::move(vel));
  }

  const std::vector<Vec3> roots(poses.size(), Vec3::Zero());
  if (poses.size() >= 3) {
    return rebuild_states(poses, roots, fps);
  }
  MotionSequence out;
  out.fps = fps;
  for (std::size_t t = 0; t < poses.size(); ++t) {
    MotionState s;
    s.pose = poses[t];
    s.vel = vels[t];
    s.acc = t < accs.size() ? accs[t] : zero_velocity(pose0.size());
    out.states.push_back(std::move(s));
  }
  return out;
}

std::string trace_to_json(const ProjectionTrace& trace) {
  nlohmann::json j;
  j["values"] = trace.values;
  j["step_lengths"] = trace.step_lengths;
  j["zero_gradient"] = trace.zero_gradient;
  return j.dump() + "\n";
}

}  // namespace rmf
