#include "rmf/pose.hpp"

#include <cmath>
#include <stdexcept>

namespace rmf {

void check_same_k(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("mismatched joint counts");
  }
}

Pose identity_pose(int k) { return Pose(k, Mat3::Identity()); }

PoseVelocity zero_velocity(int k) { return PoseVelocity(k, Vec3::Zero()); }

double pose_distance(const Pose& a, const Pose& b) {
  check_same_k(a.size(), b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += geodesic_distance(a[i], b[i]);
  }
  return d;
}

Pose pose_exp(const Pose& base, const PoseVelocity& step) {
  check_same_k(base.size(), step.size());
  Pose out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    out[i] = base[i] * exp_so3(step[i]);
  }
  return out;
}

PoseVelocity pose_log(const Pose& base, const Pose& target) {
  check_same_k(base.size(), target.size());
  PoseVelocity out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    out[i] = log_so3(base[i].transpose() * target[i]);
  }
  return out;
}

PoseTangent pose_rgrad(const Pose& pose, const std::vector<Mat3>& egrads) {
  check_same_k(pose.size(), egrads.size());
  PoseTangent out(pose.size());
  for (std::size_t i = 0; i < pose.size(); ++i) {
    out[i] = egrad2rgrad(pose[i], egrads[i]);
  }
  return out;
}

double velocity_norm(const PoseVelocity& v) {
  double s = 0.0;
  for (const Vec3& w : v) s += w.squaredNorm();
  return std::sqrt(s);
}

Pose random_pose(std::mt19937_64& rng, int k) {
  Pose p(k);
  for (auto& r : p) r = random_rotation(rng);
  return p;
}

}  // namespace rmf
