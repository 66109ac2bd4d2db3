#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmf/encoding.hpp"
#include "rmf/motion.hpp"

namespace rmf {

// Frame-aligned plausible-motion dataset D = [D_theta, D_theta_dot,
// D_theta_ddot], with provenance for reproducibility.
struct MotionCorpus {
  std::vector<Pose> poses;
  std::vector<PoseVelocity> vels;
  std::vector<PoseAcceleration> accs;
  int k = 0;
  double fps = 30.0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(poses.size()); }
};

// Per-joint sinusoidal motion about a fixed axis:
//   phi_k(t) = a_k sin(2 pi f_k t + psi_k).
// Phases are randomized per sequence; amplitude/frequency are jittered
// multiplicatively by up to +-(jitter) and clamped to the joint limit.
struct SynthMotionSpec {
  std::vector<Vec3> axes;
  std::vector<double> amplitudes;   // rad
  std::vector<double> frequencies;  // Hz
  std::vector<double> phases;       // rad
  std::vector<double> limits;       // rad
  int frames = 120;
  double fps = 30.0;
  std::uint64_t seed = 1;
  double amplitude_jitter = 0.0;
  double frequency_jitter = 0.0;
  // With coupled joints, one phase and one jitter factor are drawn per
  // sequence and shared by every joint, so joints move in lockstep and the
  // corpus carries cross-joint correlation (as real articulated motion does).
  bool coupled_joints = false;

  void validate() const;

  /// k-joint spec with distinct axes/frequencies and default jitter.
  static SynthMotionSpec toy(int k, std::uint64_t seed);
};

struct CorpusSplit {
  MotionCorpus train;
  MotionCorpus heldout;
};

/// Deterministic synthetic corpus; the middle 80% of each sequence's frames
/// are kept and sequences split 90/10 train/held-out.
CorpusSplit synth_corpus(const SynthMotionSpec& spec, int n_sequences);

struct NnResult {
  double distance = 0.0;
  int index = -1;
};

/// Exact brute-force nearest neighbor under the L1 pose geodesic metric.
NnResult nn_pose(const Pose& query, const std::vector<Pose>& dataset);

/// Exact nearest neighbor under the Euclidean metric on flattened vectors.
NnResult nn_vec(const Eigen::VectorXd& query,
                const std::vector<Eigen::VectorXd>& dataset);

// Two-stage pose retrieval: a coarse Euclidean shortlist of k' candidates on
// the quaternion encodings, then exact geodesic re-ranking to the single
// closest neighbor.
class PoseIndex {
 public:
  explicit PoseIndex(const std::vector<Pose>& dataset, int shortlist = 1000);
  NnResult query(const Pose& q) const;

 private:
  const std::vector<Pose>* dataset_;
  Eigen::MatrixXd encodings_;  // one row per element
  int shortlist_;
};

enum class FieldKind { kPose, kVelocity, kAcceleration };

struct LabeledSample {
  Eigen::VectorXd input;  // field input including conditioning blocks
  double distance = 0.0;
  int category = 0;  // 0: half-Gaussian perturbation, 1: swap, 2: random
};

struct LabeledSet {
  FieldKind kind = FieldKind::kPose;
  int k = 0;
  std::vector<LabeledSample> samples;
};

struct NegativeRatios {
  double perturb = 0.6;
  double swap = 0.3;
  double random = 0.1;
};

/// Mixed negative sampling with exact nearest-neighbor distance labels.
/// sigma is the half-Gaussian perturbation scale (rad for poses, additive
/// for the linear spaces).
LabeledSet sample_negatives(const MotionCorpus& corpus, int n,
                            const NegativeRatios& ratios, double sigma,
                            FieldKind kind, std::uint64_t seed);

std::string labels_to_json(const LabeledSet& set);
LabeledSet labels_from_json(const std::string& text);

}  // namespace rmf
