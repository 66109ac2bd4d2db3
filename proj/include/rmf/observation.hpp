#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmf/pose.hpp"

namespace rmf {

using Vec2 = Eigen::Vector2d;

struct PinholeCamera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& p_world) const {
    return rotation * p_world + translation;
  }
  /// Projects a world point; sets behind=true (and returns zeros) when the
  /// point has non-positive camera depth.
  Vec2 project(const Vec3& p_world, bool* behind = nullptr) const;
};

enum class ObservationKind { kJoints3d, kJoints2d, kPointCloud };

struct Observation {
  ObservationKind kind = ObservationKind::kJoints3d;
  // joints3d: points3d[t][j] with visible[t][j]
  std::vector<std::vector<Vec3>> points3d;
  // joints2d: points2d[t][j], confidences[t][j] in [0,1], visible[t][j]
  std::vector<std::vector<Vec2>> points2d;
  std::vector<std::vector<double>> confidences;
  std::vector<std::vector<bool>> visible;
  // pointcloud: unordered clouds[t]
  std::vector<std::vector<Vec3>> clouds;
  std::optional<PinholeCamera> camera;

  int num_frames() const;
  void validate(int k) const;

  /// Full-visibility 3D joint observation of the given positions.
  static Observation joints3d(std::vector<std::vector<Vec3>> positions);
};

std::string observation_to_json(const Observation& obs);
Observation observation_from_json(const std::string& text);
void write_observation_file(const std::string& path, const Observation& obs);
Observation read_observation_file(const std::string& path);

}  // namespace rmf
