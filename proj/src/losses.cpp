#include "rmf/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace rmf {

PositionLoss PositionLoss::zeros(int frames, int joints) {
  PositionLoss l;
  l.d_positions.assign(frames, std::vector<Vec3>(joints, Vec3::Zero()));
  return l;
}

PositionLoss loss_data_3d(const std::vector<JointPositions>& positions,
                          const Observation& obs) {
  if (obs.kind != ObservationKind::kJoints3d) {
    throw std::invalid_argument("loss_data_3d: observation kind mismatch");
  }
  const int t_max = static_cast<int>(positions.size());
  if (obs.num_frames() != t_max) {
    throw std::invalid_argument("loss_data_3d: frame count mismatch");
  }
  const int k = static_cast<int>(positions[0].size());
  PositionLoss l = PositionLoss::zeros(t_max, k);
  for (int t = 0; t < t_max; ++t) {
    for (int j = 0; j < k; ++j) {
      if (!obs.visible[t][j]) continue;
      const Vec3 r = positions[t][j] - obs.points3d[t][j];
      l.value += r.squaredNorm();
      l.d_positions[t][j] += 2.0 * r;
    }
  }
  return l;
}

PositionLoss loss_data_2d(const std::vector<JointPositions>& positions,
                          const Observation& obs, double gm_scale,
                          int* behind_camera) {
  if (obs.kind != ObservationKind::kJoints2d || !obs.camera.has_value()) {
    throw std::invalid_argument("loss_data_2d: observation kind mismatch");
  }
  const PinholeCamera& cam = *obs.camera;
  const int t_max = static_cast<int>(positions.size());
  const int k = static_cast<int>(positions[0].size());
  PositionLoss l = PositionLoss::zeros(t_max, k);
  int behind = 0;
  const double c2 = gm_scale * gm_scale;
  for (int t = 0; t < t_max; ++t) {
    for (int j = 0; j < k; ++j) {
      if (!obs.visible[t][j]) continue;
      const Vec3 pc = cam.to_camera(positions[t][j]);
      if (pc.z() <= 0.0) {
        ++behind;
        continue;
      }
      const Vec2 proj(cam.fx * pc.x() / pc.z() + cam.cx,
                      cam.fy * pc.y() / pc.z() + cam.cy);
      const Vec2 r = proj - obs.points2d[t][j];
      const double r2 = r.squaredNorm();
      const double sigma = obs.confidences[t][j];
      l.value += sigma * r2 / (r2 + c2);
      // d rho / d r, then the pinhole Jacobian back to world space.
      const Vec2 drho = 2.0 * c2 / ((r2 + c2) * (r2 + c2)) * r;
      Eigen::Matrix<double, 2, 3> jproj;
      const double iz = 1.0 / pc.z();
      jproj << cam.fx * iz, 0.0, -cam.fx * pc.x() * iz * iz, 0.0,
          cam.fy * iz, -cam.fy * pc.y() * iz * iz;
      l.d_positions[t][j] +=
          sigma * (jproj * cam.rotation).transpose() * drho;
    }
  }
  if (behind_camera != nullptr) *behind_camera = behind;
  return l;
}

PositionLoss loss_data_pc(const std::vector<JointPositions>& positions,
                          const Observation& obs, double bisquare_scale) {
  if (obs.kind != ObservationKind::kPointCloud) {
    throw std::invalid_argument("loss_data_pc: observation kind mismatch");
  }
  const int t_max = static_cast<int>(positions.size());
  if (obs.num_frames() != t_max) {
    throw std::invalid_argument("loss_data_pc: frame count mismatch");
  }
  const int k = static_cast<int>(positions[0].size());
  PositionLoss l = PositionLoss::zeros(t_max, k);
  const double c2 = bisquare_scale * bisquare_scale;
  for (int t = 0; t < t_max; ++t) {
    for (const Vec3& o : obs.clouds[t]) {
      int best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d2 = (positions[t][j] - o).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = j;
        }
      }
      const double u = best_d2 / c2;
      if (u >= 1.0) continue;  // bisquare cutoff
      const double w = (1.0 - u) * (1.0 - u);
      l.value += w * best_d2;
      // d/dp of (1-u)^2 r^2 with u = r^2/c^2.
      l.d_positions[t][best] +=
          2.0 * (1.0 - u) * (1.0 - 3.0 * u) * (positions[t][best] - o);
    }
  }
  return l;
}

PositionLoss loss_smooth(const std::vector<JointPositions>& positions) {
  const int t_max = static_cast<int>(positions.size());
  if (t_max < 2) {
    throw std::invalid_argument("loss_smooth: need at least 2 frames");
  }
  const int k = static_cast<int>(positions[0].size());
  PositionLoss l = PositionLoss::zeros(t_max, k);
  for (int t = 0; t + 1 < t_max; ++t) {
    for (int j = 0; j < k; ++j) {
      const Vec3 r = positions[t + 1][j] - positions[t][j];
      l.value += r.squaredNorm();
      l.d_positions[t + 1][j] += 2.0 * r;
      l.d_positions[t][j] -= 2.0 * r;
    }
  }
  return l;
}

PositionLoss loss_bone_length(const Skeleton& skel,
                              const std::vector<JointPositions>& positions) {
  const int t_max = static_cast<int>(positions.size());
  if (t_max < 2) {
    throw std::invalid_argument("loss_bone_length: need at least 2 frames");
  }
  const int k = skel.num_joints();
  PositionLoss l = PositionLoss::zeros(t_max, k);
  for (int t = 0; t + 1 < t_max; ++t) {
    for (int j = 1; j < k; ++j) {
      const int p = skel.parent[j];
      const Vec3 b0 = positions[t][j] - positions[t][p];
      const Vec3 b1 = positions[t + 1][j] - positions[t + 1][p];
      const double len0 = b0.norm();
      const double len1 = b1.norm();
      const double diff = len1 - len0;
      l.value += diff * diff;
      if (len1 > 1e-12) {
        const Vec3 d1 = 2.0 * diff / len1 * b1;
        l.d_positions[t + 1][j] += d1;
        l.d_positions[t + 1][p] -= d1;
      }
      if (len0 > 1e-12) {
        const Vec3 d0 = 2.0 * diff / len0 * b0;
        l.d_positions[t][j] -= d0;
        l.d_positions[t][p] += d0;
      }
    }
  }
  return l;
}

ContactLoss loss_contact(const std::vector<JointPositions>& positions,
                         const std::vector<PoseVelocity>& vels,
                         const std::vector<int>& contact_joints,
                         const std::vector<std::vector<double>>& contact_probs,
                         const ContactWeights& w) {
  const int t_max = static_cast<int>(positions.size());
  const int k = static_cast<int>(positions[0].size());
  ContactLoss l;
  l.d_positions.assign(t_max, std::vector<Vec3>(k, Vec3::Zero()));
  l.d_vels.assign(t_max, zero_velocity(k));
  for (int t = 1; t < t_max; ++t) {
    for (std::size_t i = 0; i < contact_joints.size(); ++i) {
      const double c = contact_probs[t][i];
      if (c <= 0.0) continue;
      const int j = contact_joints[i];
      const Vec3 slide = positions[t][j] - positions[t - 1][j];
      l.value += w.joint * c * slide.squaredNorm();
      l.d_positions[t][j] += 2.0 * w.joint * c * slide;
      l.d_positions[t - 1][j] -= 2.0 * w.joint * c * slide;

      l.value += w.vel * c * vels[t][j].squaredNorm();
      l.d_vels[t][j] += 2.0 * w.vel * c * vels[t][j];

      const double excess = std::abs(positions[t][j].z()) - w.delta;
      if (excess > 0.0) {
        l.value += w.height * c * excess;
        l.d_positions[t][j].z() +=
            w.height * c * (positions[t][j].z() >= 0.0 ? 1.0 : -1.0);
      }
    }
  }
  return l;
}

std::vector<int> leaf_joints(const Skeleton& skel) {
  std::vector<bool> has_child(skel.num_joints(), false);
  for (int i = 1; i < skel.num_joints(); ++i) has_child[skel.parent[i]] = true;
  std::vector<int> leaves;
  for (int i = 0; i < skel.num_joints(); ++i) {
    if (!has_child[i]) leaves.push_back(i);
  }
  return leaves;
}

std::vector<std::vector<double>> heuristic_contact_probs(
    const std::vector<JointPositions>& positions,
    const std::vector<int>& contact_joints, double fps, double delta,
    double speed_threshold) {
  const int t_max = static_cast<int>(positions.size());
  std::vector<std::vector<double>> probs(
      t_max, std::vector<double>(contact_joints.size(), 0.0));
  for (int t = 1; t < t_max; ++t) {
    for (std::size_t i = 0; i < contact_joints.size(); ++i) {
      const int j = contact_joints[i];
      const double speed =
          (positions[t][j] - positions[t - 1][j]).norm() * fps;
      if (std::abs(positions[t][j].z()) < delta && speed < speed_threshold) {
        probs[t][i] = 1.0;
      }
    }
  }
  return probs;
}

}  // namespace rmf
