#include "rmf/optimize.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "rmf/encoding.hpp"

namespace rmf {

namespace {

constexpr double kBetaFloor = 1e-3;

Skeleton with_beta(const Skeleton& base, const std::vector<double>& beta) {
  Skeleton s = base;
  s.beta = beta;
  return s;
}

/// Accumulates a gradient over a canonical-quaternion block into tangent
/// coordinates: g_i += scale * gq . d/de q(R Exp(e hat(e_i))).
void add_quat_block_grad(const Pose& pose, const Eigen::VectorXd& gq,
                         double scale, PoseVelocity& d_pose) {
  for (std::size_t j = 0; j < pose.size(); ++j) {
    const Vec4 q = quat_encode(pose[j]);
    const Vec4 block = gq.segment<4>(4 * j);
    for (int i = 0; i < 3; ++i) {
      Vec4 e = Vec4::Zero();
      e[1 + i] = 1.0;
      d_pose[j][i] += scale * 0.5 * block.dot(quat_multiply(q, e));
    }
  }
}

/// Backward pass of the log-central velocity estimator: gradients w.r.t.
/// the estimated velocities accumulate into pose tangent coordinates.
void velocity_chain_backward(const std::vector<Pose>& poses,
                             const std::vector<PoseVelocity>& d_omega,
                             double fps,
                             std::vector<PoseVelocity>& d_pose) {
  const int t_max = static_cast<int>(poses.size());
  const int k = static_cast<int>(poses[0].size());
  for (int t = 0; t < t_max; ++t) {
    const int lo = std::max(t - 1, 0);
    const int hi = std::min(t + 1, t_max - 1);
    const double scale = fps / static_cast<double>(hi - lo);
    for (int j = 0; j < k; ++j) {
      const Vec3& up = d_omega[t][j];
      if (up.isZero(0.0)) continue;
      const Mat3 rel = poses[lo][j].transpose() * poses[hi][j];
      const Vec3 w = log_so3(rel);
      const Vec3 jt_up = right_jacobian_inv(w).transpose() * up;
      d_pose[hi][j] += scale * jt_up;
      d_pose[lo][j] -= scale * (rel * jt_up);
    }
  }
}

/// Backward pass of the central-difference acceleration estimator.
void accel_chain_backward(const std::vector<PoseVelocity>& d_alpha,
                          double fps, std::vector<PoseVelocity>& d_omega) {
  const int t_max = static_cast<int>(d_alpha.size());
  for (int t = 0; t < t_max; ++t) {
    const int lo = std::max(t - 1, 0);
    const int hi = std::min(t + 1, t_max - 1);
    const double scale = fps / static_cast<double>(hi - lo);
    for (std::size_t j = 0; j < d_alpha[t].size(); ++j) {
      d_omega[hi][j] += scale * d_alpha[t][j];
      d_omega[lo][j] -= scale * d_alpha[t][j];
    }
  }
}

struct EnergyContext {
  const Observation* obs;
  const Skeleton* base_skel;
  const EnergyWeights* w;
  const FieldSet* fields;
  double fps;
};

EnergyGradient evaluate(const SequenceVars& vars, Stage stage,
                        const EnergyContext& ctx, bool with_gradient) {
  const EnergyWeights& w = *ctx.w;
  const int t_max = vars.num_frames();
  const int k = static_cast<int>(vars.poses[0].size());
  const Skeleton skel = with_beta(*ctx.base_skel, vars.beta);

  EnergyGradient out;
  out.d_pose.assign(t_max, zero_velocity(k));
  out.d_root.assign(t_max, Vec3::Zero());
  out.d_beta.assign(k, 0.0);

  std::vector<FkResult> fk(t_max);
  std::vector<JointPositions> positions(t_max);
  for (int t = 0; t < t_max; ++t) {
    fk[t] = forward_kinematics_full(skel, vars.roots[t], vars.poses[t]);
    positions[t] = fk[t].positions;
  }

  std::vector<std::vector<Vec3>> d_positions(
      t_max, std::vector<Vec3>(k, Vec3::Zero()));
  const auto add_position_loss = [&](const PositionLoss& l, double weight) {
    out.value += weight * l.value;
    if (!with_gradient) return;
    for (int t = 0; t < t_max; ++t) {
      for (int j = 0; j < k; ++j) {
        d_positions[t][j] += weight * l.d_positions[t][j];
      }
    }
  };

  // Data term.
  if (w.data > 0.0) {
    switch (ctx.obs->kind) {
      case ObservationKind::kJoints3d:
        add_position_loss(loss_data_3d(positions, *ctx.obs), w.data);
        break;
      case ObservationKind::kJoints2d:
        add_position_loss(loss_data_2d(positions, *ctx.obs, w.gm_scale),
                          w.data);
        break;
      case ObservationKind::kPointCloud:
        add_position_loss(loss_data_pc(positions, *ctx.obs, w.bisquare_scale),
                          w.data);
        break;
    }
  }

  // Regularizers.
  if (t_max >= 2) {
    if (w.smooth > 0.0) add_position_loss(loss_smooth(positions), w.smooth);
    if (w.bone_length > 0.0) {
      add_position_loss(loss_bone_length(skel, positions), w.bone_length);
    }
  }

  // Shape prior |beta|^2.
  if (w.beta > 0.0) {
    for (int j = 0; j < k; ++j) {
      out.value += w.beta * vars.beta[j] * vars.beta[j];
      if (with_gradient) out.d_beta[j] += 2.0 * w.beta * vars.beta[j];
    }
  }

  // Pose prior.
  if (w.pose_prior > 0.0 && ctx.fields->pose != nullptr) {
    for (int t = 0; t < t_max; ++t) {
      PoseVelocity g;
      const double v = ctx.fields->pose->pose_value_grad(vars.poses[t], g);
      out.value += w.pose_prior * v;
      if (with_gradient) {
        for (int j = 0; j < k; ++j) {
          out.d_pose[t][j] += w.pose_prior * g[j];
        }
      }
    }
  }

  const bool needs_dynamics =
      stage == Stage::kTwo && t_max >= 3 &&
      (w.vel_prior > 0.0 || w.acc_prior > 0.0 || w.contact_vel > 0.0 ||
       w.contact_joint > 0.0 || w.contact_height > 0.0);
  if (needs_dynamics) {
    if (ctx.fields->velocity == nullptr || ctx.fields->acceleration == nullptr) {
      if (w.vel_prior > 0.0 || w.acc_prior > 0.0) {
        throw std::invalid_argument(
            "energy: stage II priors need the velocity and acceleration "
            "fields");
      }
    }
    const auto vels = estimate_velocity(vars.poses, ctx.fps,
                                        VelocityScheme::kLogCentral);
    const auto accs =
        estimate_acceleration(vels, ctx.fps, AccelScheme::kCentral);

    std::vector<PoseVelocity> d_omega(t_max, zero_velocity(k));
    std::vector<PoseVelocity> d_alpha(t_max, zero_velocity(k));

    if (w.vel_prior > 0.0 && ctx.fields->velocity != nullptr) {
      const DistanceField& f = *ctx.fields->velocity;
      for (int t = 0; t < t_max; ++t) {
        Eigen::VectorXd x(7 * k);
        x << encode_vecs(vels[t]), encode_pose(vars.poses[t]);
        out.value += w.vel_prior * f.eval(x);
        if (with_gradient) {
          const Eigen::VectorXd g = f.grad(x);
          for (int j = 0; j < k; ++j) {
            d_omega[t][j] += w.vel_prior * Vec3(g.segment<3>(3 * j));
          }
          add_quat_block_grad(vars.poses[t], g.segment(3 * k, 4 * k),
                              w.vel_prior, out.d_pose[t]);
        }
      }
    }
    if (w.acc_prior > 0.0 && ctx.fields->acceleration != nullptr) {
      const DistanceField& f = *ctx.fields->acceleration;
      for (int t = 0; t < t_max; ++t) {
        Eigen::VectorXd x(10 * k);
        x << encode_vecs(accs[t]), encode_pose(vars.poses[t]),
            encode_vecs(vels[t]);
        out.value += w.acc_prior * f.eval(x);
        if (with_gradient) {
          const Eigen::VectorXd g = f.grad(x);
          for (int j = 0; j < k; ++j) {
            d_alpha[t][j] += w.acc_prior * Vec3(g.segment<3>(3 * j));
            d_omega[t][j] +=
                w.acc_prior * Vec3(g.segment<3>(7 * k + 3 * j));
          }
          add_quat_block_grad(vars.poses[t], g.segment(3 * k, 4 * k),
                              w.acc_prior, out.d_pose[t]);
        }
      }
    }

    if (w.contact_joint > 0.0 || w.contact_vel > 0.0 ||
        w.contact_height > 0.0) {
      const auto joints = leaf_joints(skel);
      const auto probs = heuristic_contact_probs(
          positions, joints, ctx.fps, w.contact_delta,
          w.contact_speed_threshold);
      ContactWeights cw{w.contact_joint, w.contact_vel, w.contact_height,
                        w.contact_delta};
      const ContactLoss cl =
          loss_contact(positions, vels, joints, probs, cw);
      out.value += cl.value;
      if (with_gradient) {
        for (int t = 0; t < t_max; ++t) {
          for (int j = 0; j < k; ++j) {
            d_positions[t][j] += cl.d_positions[t][j];
            d_omega[t][j] += cl.d_vels[t][j];
          }
        }
      }
    }

    if (with_gradient) {
      accel_chain_backward(d_alpha, ctx.fps, d_omega);
      velocity_chain_backward(vars.poses, d_omega, ctx.fps, out.d_pose);
    }
  }

  if (with_gradient) {
    for (int t = 0; t < t_max; ++t) {
      const FkGradient g =
          fk_backward(skel, vars.poses[t], fk[t], d_positions[t]);
      for (int j = 0; j < k; ++j) {
        out.d_pose[t][j] += g.d_pose[j];
        out.d_beta[j] += g.d_beta[j];
      }
      out.d_root[t] += g.d_t_r;
    }
  }
  return out;
}

SequenceVars vars_from_sequence(const MotionSequence& seq,
                                const Skeleton& skel) {
  SequenceVars vars;
  for (const auto& s : seq.states) {
    vars.poses.push_back(s.pose);
    vars.roots.push_back(s.t_r);
  }
  vars.beta = skel.beta;
  return vars;
}

MotionSequence sequence_from_vars(const SequenceVars& vars, double fps) {
  if (vars.num_frames() >= 3) {
    return rebuild_states(vars.poses, vars.roots, fps);
  }
  MotionSequence out;
  out.fps = fps;
  for (int t = 0; t < vars.num_frames(); ++t) {
    MotionState s;
    s.t_r = vars.roots[t];
    s.pose = vars.poses[t];
    s.vel = zero_velocity(static_cast<int>(vars.poses[t].size()));
    s.acc = s.vel;
    out.states.push_back(std::move(s));
  }
  return out;
}

SequenceVars apply_step(const SequenceVars& vars, const EnergyGradient& g,
                        double scale, const FitSchedule& schedule) {
  SequenceVars next = vars;
  for (int t = 0; t < vars.num_frames(); ++t) {
    PoseVelocity step(vars.poses[t].size());
    for (std::size_t j = 0; j < step.size(); ++j) {
      step[j] = -scale * schedule.step_pose * g.d_pose[t][j];
    }
    next.poses[t] = pose_exp(vars.poses[t], step);
    if (schedule.optimize_root) {
      next.roots[t] -= scale * schedule.step_root * g.d_root[t];
    }
  }
  if (schedule.optimize_beta) {
    for (std::size_t j = 0; j < next.beta.size(); ++j) {
      next.beta[j] = std::max(
          kBetaFloor, next.beta[j] - scale * schedule.step_beta * g.d_beta[j]);
    }
  }
  return next;
}

/// One monotone stage of backtracking gradient descent. Returns true if the
/// stage ran out of iterations (rather than stalling).
bool run_stage(SequenceVars& vars, Stage stage, const EnergyContext& ctx,
               const FitSchedule& schedule, int iters,
               std::vector<double>& trace) {
  double current = evaluate(vars, stage, ctx, false).value;
  trace.push_back(current);
  for (int it = 0; it < iters; ++it) {
    const EnergyGradient g = evaluate(vars, stage, ctx, true);
    double scale = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= schedule.max_backtracks; ++bt) {
      SequenceVars candidate = apply_step(vars, g, scale, schedule);
      const double e = evaluate(candidate, stage, ctx, false).value;
      if (e < current) {
        vars = std::move(candidate);
        current = e;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) return false;  // stalled: no descent direction left

    if (stage == Stage::kTwo && schedule.rollout_each_iter &&
        vars.num_frames() >= 3) {
      // Rebuild a dynamically consistent state through the projected
      // integrator; kept only when it does not increase the energy,
      // preserving the monotone-descent guarantee. (An unconditional rebuild
      // compounds integration drift over the horizon and destroys the data
      // fit long before descent can recover it.)
      const auto vels = estimate_velocity(vars.poses, ctx.fps,
                                          VelocityScheme::kLogCentral);
      const auto accs =
          estimate_acceleration(vels, ctx.fps, AccelScheme::kCentral);
      const std::vector<PoseAcceleration> acc_seq(accs.begin(),
                                                  accs.end() - 1);
      const MotionSequence rolled =
          integrate(vars.poses[0], vels[0], acc_seq, *ctx.fields,
                    schedule.rollout, ctx.fps);
      SequenceVars candidate = vars;
      for (int t = 0; t < vars.num_frames(); ++t) {
        candidate.poses[t] = rolled.states[t].pose;
      }
      const double e = evaluate(candidate, stage, ctx, false).value;
      if (e <= current) {
        vars = std::move(candidate);
        current = e;
      }
    }
    trace.push_back(current);
  }
  return true;
}

}  // namespace

double energy(const SequenceVars& vars, Stage stage, const Observation& obs,
              const Skeleton& base_skel, const EnergyWeights& w,
              const FieldSet& fields, double fps) {
  EnergyContext ctx{&obs, &base_skel, &w, &fields, fps};
  return evaluate(vars, stage, ctx, false).value;
}

EnergyGradient energy_gradient(const SequenceVars& vars, Stage stage,
                               const Observation& obs,
                               const Skeleton& base_skel,
                               const EnergyWeights& w, const FieldSet& fields,
                               double fps) {
  EnergyContext ctx{&obs, &base_skel, &w, &fields, fps};
  return evaluate(vars, stage, ctx, true);
}

MotionSequence fit_sequence(const Observation& obs, const Skeleton& skel,
                            const EnergyWeights& w, const FieldSet& fields,
                            const FitSchedule& schedule,
                            const MotionSequence* init, FitReport* report) {
  skel.validate();
  const int k = skel.num_joints();
  obs.validate(k);
  const int t_max = obs.num_frames();
  if (t_max < 1) throw std::invalid_argument("fit_sequence: no frames");

  SequenceVars vars;
  if (init != nullptr) {
    if (init->num_frames() != t_max) {
      throw std::invalid_argument("fit_sequence: init frame count mismatch");
    }
    vars = vars_from_sequence(*init, skel);
  } else {
    vars.poses.assign(t_max, identity_pose(k));
    vars.roots.assign(t_max, Vec3::Zero());
    vars.beta = skel.beta;
  }

  EnergyContext ctx{&obs, &skel, &w, &fields, 30.0};
  if (init != nullptr) ctx.fps = init->fps;

  FitReport local;
  local.converged_stage1 = !run_stage(vars, Stage::kOne, ctx, schedule,
                                      schedule.stage1_iters,
                                      local.stage1_energy);
  local.converged_stage2 = !run_stage(vars, Stage::kTwo, ctx, schedule,
                                      schedule.stage2_iters,
                                      local.stage2_energy);
  if (report != nullptr) *report = local;

  MotionSequence out = sequence_from_vars(vars, ctx.fps);
  return out;
}

MotionSequence generate_motion(const MotionState& seed, const Skeleton& skel,
                               const FieldSet& fields, int horizon,
                               double noise_scale, std::uint64_t rng_seed,
                               const EnergyWeights& w,
                               const FitSchedule& schedule, double fps) {
  if (horizon < 2) throw std::invalid_argument("generate_motion: horizon < 2");
  const int k = static_cast<int>(seed.pose.size());
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Noisy transition walk.
  std::vector<Pose> poses = {seed.pose};
  std::vector<PoseVelocity> vels = {seed.vel};
  for (int t = 1; t <= horizon; ++t) {
    PoseVelocity v = vels.back();
    for (auto& x : v) {
      x += noise_scale * Vec3(gauss(rng), gauss(rng), gauss(rng));
    }
    PoseVelocity step(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) step[j] = v[j] / fps;
    poses.push_back(pose_exp(poses.back(), step));
    vels.push_back(std::move(v));
  }
  const auto accs = estimate_acceleration(vels, fps, AccelScheme::kCentral);
  const std::vector<PoseAcceleration> acc_seq(accs.begin(), accs.end() - 1);

  IntegratorConfig icfg = schedule.rollout;
  icfg.lambda = 1.0 / fps;
  icfg.alpha = 1.0 / fps;
  const MotionSequence denoised =
      integrate(poses[0], vels[0], acc_seq, fields, icfg, fps);

  // Refine against the denoised rollout as a soft observation.
  std::vector<std::vector<Vec3>> obs_positions;
  for (const auto& s : denoised.states) {
    obs_positions.push_back(forward_kinematics(skel, s.t_r, s.pose));
  }
  const Observation obs = Observation::joints3d(std::move(obs_positions));
  return fit_sequence(obs, skel, w, fields, schedule, &denoised);
}

std::vector<Pose> geodesic_interpolate(const std::vector<Pose>& poses,
                                       const std::vector<bool>& observed) {
  const int t_max = static_cast<int>(poses.size());
  if (observed.size() != poses.size()) {
    throw std::invalid_argument("geodesic_interpolate: mask size mismatch");
  }
  std::vector<int> keys;
  for (int t = 0; t < t_max; ++t) {
    if (observed[t]) keys.push_back(t);
  }
  if (keys.size() < 2) {
    throw std::invalid_argument("geodesic_interpolate: need >= 2 keyframes");
  }
  std::vector<Pose> out = poses;
  for (int t = 0; t < t_max; ++t) {
    if (observed[t]) continue;
    if (t < keys.front()) {
      out[t] = poses[keys.front()];
      continue;
    }
    if (t > keys.back()) {
      out[t] = poses[keys.back()];
      continue;
    }
    int a = keys.front(), b = keys.back();
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      if (keys[i] < t && t < keys[i + 1]) {
        a = keys[i];
        b = keys[i + 1];
        break;
      }
    }
    const double s = static_cast<double>(t - a) / (b - a);
    PoseVelocity full = pose_log(poses[a], poses[b]);
    for (auto& v : full) v *= s;
    out[t] = pose_exp(poses[a], full);
  }
  return out;
}

MotionSequence inbetween(const MotionSequence& keyframes,
                         const std::vector<bool>& observed,
                         const Skeleton& skel, const EnergyWeights& w,
                         const FieldSet& fields, const FitSchedule& schedule,
                         FitReport* report) {
  const int t_max = keyframes.num_frames();
  if (static_cast<int>(observed.size()) != t_max) {
    throw std::invalid_argument("inbetween: mask size mismatch");
  }
  const int k = keyframes.num_joints();

  // Initialization: geodesic interpolation of poses, linear roots.
  std::vector<Pose> init_poses =
      geodesic_interpolate(keyframes.poses(), observed);
  std::vector<Vec3> roots(t_max, Vec3::Zero());
  {
    std::vector<int> keys;
    for (int t = 0; t < t_max; ++t) {
      if (observed[t]) keys.push_back(t);
    }
    for (int t = 0; t < t_max; ++t) {
      if (observed[t]) {
        roots[t] = keyframes.states[t].t_r;
      } else if (t < keys.front()) {
        roots[t] = keyframes.states[keys.front()].t_r;
      } else if (t > keys.back()) {
        roots[t] = keyframes.states[keys.back()].t_r;
      } else {
        int a = keys.front(), b = keys.back();
        for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
          if (keys[i] < t && t < keys[i + 1]) {
            a = keys[i];
            b = keys[i + 1];
            break;
          }
        }
        const double s = static_cast<double>(t - a) / (b - a);
        roots[t] = (1.0 - s) * keyframes.states[a].t_r +
                   s * keyframes.states[b].t_r;
      }
    }
  }

  // Observed frames become 3D joint observations; masked frames invisible.
  std::vector<std::vector<Vec3>> obs_positions(
      t_max, std::vector<Vec3>(k, Vec3::Zero()));
  Observation obs;
  obs.kind = ObservationKind::kJoints3d;
  obs.visible.assign(t_max, std::vector<bool>(k, false));
  for (int t = 0; t < t_max; ++t) {
    if (!observed[t]) continue;
    obs_positions[t] = forward_kinematics(skel, keyframes.states[t].t_r,
                                          keyframes.states[t].pose);
    obs.visible[t].assign(k, true);
  }
  obs.points3d = std::move(obs_positions);

  const MotionSequence init = rebuild_states(init_poses, roots, keyframes.fps);
  return fit_sequence(obs, skel, w, fields, schedule, &init, report);
}

std::string fit_report_to_json(const FitReport& report) {
  nlohmann::json j;
  j["stage1_energy"] = report.stage1_energy;
  j["stage2_energy"] = report.stage2_energy;
  j["converged_stage1"] = report.converged_stage1;
  j["converged_stage2"] = report.converged_stage2;
  return j.dump(2) + "\n";
}

}  // namespace rmf
