#pragma once

#include <Eigen/Dense>

#include "rmf/pose.hpp"

namespace rmf {

// Field input encodings. Poses become K canonicalized unit quaternions
// flattened to 4K reals; velocities and accelerations flatten to 3K reals.

inline Eigen::VectorXd encode_pose(const Pose& pose) {
  Eigen::VectorXd out(4 * pose.size());
  for (std::size_t i = 0; i < pose.size(); ++i) {
    out.segment<4>(4 * i) = quat_encode(pose[i]);
  }
  return out;
}

inline Pose decode_pose(const Eigen::VectorXd& enc) {
  Pose out(enc.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = quat_decode(enc.segment<4>(4 * i));
  }
  return out;
}

inline Eigen::VectorXd encode_vecs(const std::vector<Vec3>& vs) {
  Eigen::VectorXd out(3 * vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    out.segment<3>(3 * i) = vs[i];
  }
  return out;
}

inline std::vector<Vec3> decode_vecs(const Eigen::VectorXd& enc) {
  std::vector<Vec3> out(enc.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = enc.segment<3>(3 * i);
  }
  return out;
}

}  // namespace rmf
