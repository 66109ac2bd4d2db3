#pragma once

#include <cstdint>

#include "rmf/losses.hpp"
#include "rmf/metrics.hpp"
#include "rmf/projection.hpp"

namespace rmf {

struct EnergyWeights {
  double data = 1.0;
  double beta = 8e-2;
  double pose_prior = 8e-2;
  double smooth = 10.0;
  double bone_length = 1.0;
  double vel_prior = 1.0;
  // The reference weight list carries an ambiguous duplicate entry; 5e-2 is
  // read as the acceleration weight and left configurable.
  double acc_prior = 5e-2;
  double contact_joint = 0.0;
  double contact_vel = 0.0;
  double contact_height = 0.0;
  double contact_delta = 0.05;         // m
  double contact_speed_threshold = 0.2;  // m/s
  double gm_scale = 100.0;   // px
  double bisquare_scale = 0.2;  // m
};

// Decision variables: per-frame root translation and pose, one shared
// per-bone scale vector.
struct SequenceVars {
  std::vector<Pose> poses;
  std::vector<Vec3> roots;
  std::vector<double> beta;

  int num_frames() const { return static_cast<int>(poses.size()); }
};

enum class Stage { kOne, kTwo };

struct EnergyGradient {
  double value = 0.0;
  std::vector<PoseVelocity> d_pose;  // tangent coordinates per frame
  std::vector<Vec3> d_root;
  std::vector<double> d_beta;
};

/// Stage-I energy: data + beta prior + pose prior + regularizers. Stage II
/// adds the velocity/acceleration priors (velocities and accelerations are
/// re-estimated from the current poses) and the contact terms.
double energy(const SequenceVars& vars, Stage stage, const Observation& obs,
              const Skeleton& base_skel, const EnergyWeights& w,
              const FieldSet& fields, double fps);

EnergyGradient energy_gradient(const SequenceVars& vars, Stage stage,
                               const Observation& obs,
                               const Skeleton& base_skel,
                               const EnergyWeights& w, const FieldSet& fields,
                               double fps);

struct FitSchedule {
  int stage1_iters = 200;
  int stage2_iters = 500;
  double step_pose = 2e-3;
  double step_root = 2e-3;
  double step_beta = 2e-4;
  bool optimize_root = true;
  bool optimize_beta = true;
  bool rollout_each_iter = true;
  int max_backtracks = 15;
  IntegratorConfig rollout;
};

struct FitReport {
  std::vector<double> stage1_energy;
  std::vector<double> stage2_energy;
  bool converged_stage1 = false;
  bool converged_stage2 = false;
};

/// Multi-stage test-time optimization. Stage I minimizes the stage-one
/// energy from the initialization (identity poses unless init is given);
/// stage II minimizes the full energy and, when enabled, applies the
/// projected-integrator rollout each iteration, keeping the rolled state
/// only if it does not increase the energy.
MotionSequence fit_sequence(const Observation& obs, const Skeleton& skel,
                            const EnergyWeights& w, const FieldSet& fields,
                            const FitSchedule& schedule,
                            const MotionSequence* init = nullptr,
                            FitReport* report = nullptr);

/// Rollout of a noisy transition walk from the seed state, denoised by the
/// projected integrator, then refined by test-time optimization against the
/// denoised rollout as a soft observation.
MotionSequence generate_motion(const MotionState& seed, const Skeleton& skel,
                               const FieldSet& fields, int horizon,
                               double noise_scale, std::uint64_t rng_seed,
                               const EnergyWeights& w,
                               const FitSchedule& schedule, double fps);

/// Constant-speed per-joint geodesic interpolation of masked frames between
/// bracketing observed frames (nearest-frame hold outside the brackets).
std::vector<Pose> geodesic_interpolate(const std::vector<Pose>& poses,
                                       const std::vector<bool>& observed);

/// Keyframe in-betweening: geodesic initialization of the masked frames,
/// then fit_sequence with the observed frames as 3D joint observations.
MotionSequence inbetween(const MotionSequence& keyframes,
                         const std::vector<bool>& observed,
                         const Skeleton& skel, const EnergyWeights& w,
                         const FieldSet& fields, const FitSchedule& schedule,
                         FitReport* report = nullptr);

std::string fit_report_to_json(const FitReport& report);

}  // namespace rmf
