#include "rmf/motion.hpp"

#include <stdexcept>

namespace rmf {

std::vector<Pose> MotionSequence::poses() const {
  std::vector<Pose> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.pose);
  return out;
}

namespace {

Vec3 joint_velocity(const Mat3& prev, const Mat3& center, const Mat3& next,
                    double scale, VelocityScheme scheme) {
  if (scheme == VelocityScheme::kLogCentral) {
    return log_so3(prev.transpose() * next) * scale;
  }
  const Mat3 omega =
      skew_part(center.transpose() * ((next - prev) * scale));
  return vee(omega);
}

}  // namespace

std::vector<PoseVelocity> estimate_velocity(const std::vector<Pose>& poses,
                                            double fps,
                                            VelocityScheme scheme) {
  const int t_max = static_cast<int>(poses.size());
  if (t_max < 3) {
    throw std::invalid_argument("estimate_velocity: need at least 3 frames");
  }
  const int k = static_cast<int>(poses[0].size());
  std::vector<PoseVelocity> out(t_max, zero_velocity(k));
  for (int t = 0; t < t_max; ++t) {
    check_same_k(poses[t].size(), poses[0].size());
    const int lo = std::max(t - 1, 0);
    const int hi = std::min(t + 1, t_max - 1);
    const double scale = fps / static_cast<double>(hi - lo);
    for (int j = 0; j < k; ++j) {
      out[t][j] =
          joint_velocity(poses[lo][j], poses[t][j], poses[hi][j], scale, scheme);
    }
  }
  return out;
}

Vec3 parallel_transport(const Mat3& from, const Mat3& to, const Vec3& w) {
  const Vec3 u = log_so3(from.transpose() * to);
  return exp_so3(-0.5 * u) * w;
}

std::vector<PoseAcceleration> estimate_acceleration(
    const std::vector<PoseVelocity>& vels, double fps, AccelScheme scheme,
    const std::vector<Pose>* poses) {
  const int t_max = static_cast<int>(vels.size());
  if (t_max < 3) {
    throw std::invalid_argument(
        "estimate_acceleration: need at least 3 frames");
  }
  if (scheme == AccelScheme::kLogTransport &&
      (poses == nullptr || static_cast<int>(poses->size()) != t_max)) {
    throw std::invalid_argument(
        "estimate_acceleration: log-transport scheme needs the poses");
  }
  const int k = static_cast<int>(vels[0].size());
  std::vector<PoseAcceleration> out(t_max, zero_velocity(k));
  for (int t = 0; t < t_max; ++t) {
    const int lo = std::max(t - 1, 0);
    const int hi = std::min(t + 1, t_max - 1);
    const double scale = fps / static_cast<double>(hi - lo);
    for (int j = 0; j < k; ++j) {
      Vec3 v_hi = vels[hi][j];
      Vec3 v_lo = vels[lo][j];
      if (scheme == AccelScheme::kLogTransport) {
        v_hi = parallel_transport((*poses)[hi][j], (*poses)[t][j], v_hi);
        v_lo = parallel_transport((*poses)[lo][j], (*poses)[t][j], v_lo);
      }
      out[t][j] = (v_hi - v_lo) * scale;
    }
  }
  return out;
}

MotionSequence canonicalize(const MotionSequence& seq) {
  if (seq.states.empty()) {
    throw std::invalid_argument("canonicalize: empty sequence");
  }
  const Mat3 root0 = seq.states[0].pose[0];
  const Vec3 t0 = seq.states[0].t_r;
  MotionSequence out = seq;
  for (auto& s : out.states) {
    s.pose[0] = root0.transpose() * s.pose[0];
    s.t_r = root0.transpose() * (s.t_r - t0);
  }
  return out;
}

MotionSequence rebuild_states(const std::vector<Pose>& poses,
                              const std::vector<Vec3>& roots, double fps) {
  if (roots.size() != poses.size()) {
    throw std::invalid_argument("rebuild_states: roots/poses size mismatch");
  }
  const auto vels = estimate_velocity(poses, fps, VelocityScheme::kLogCentral);
  const auto accs = estimate_acceleration(vels, fps, AccelScheme::kCentral);
  MotionSequence out;
  out.fps = fps;
  out.states.resize(poses.size());
  for (std::size_t t = 0; t < poses.size(); ++t) {
    out.states[t] = {roots[t], poses[t], vels[t], accs[t]};
  }
  return out;
}

}  // namespace rmf
