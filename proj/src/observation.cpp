#include "rmf/observation.hpp"

#include <stdexcept>

#include <json.hpp>

#include "rmf/motion_io.hpp"

namespace rmf {

using nlohmann::json;

Vec2 PinholeCamera::project(const Vec3& p_world, bool* behind) const {
  const Vec3 p = to_camera(p_world);
  if (p.z() <= 0.0) {
    if (behind != nullptr) *behind = true;
    return Vec2::Zero();
  }
  if (behind != nullptr) *behind = false;
  return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
}

int Observation::num_frames() const {
  switch (kind) {
    case ObservationKind::kJoints3d:
      return static_cast<int>(points3d.size());
    case ObservationKind::kJoints2d:
      return static_cast<int>(points2d.size());
    case ObservationKind::kPointCloud:
      return static_cast<int>(clouds.size());
  }
  return 0;
}

void Observation::validate(int k) const {
  if (kind == ObservationKind::kJoints2d && !camera.has_value()) {
    throw std::invalid_argument("observation: 2D joints need a camera");
  }
  const auto check_joints = [&](std::size_t n, const char* what) {
    if (static_cast<int>(n) != k) {
      throw std::invalid_argument(std::string("observation: ") + what +
                                  " joint count mismatch");
    }
  };
  if (kind == ObservationKind::kJoints3d) {
    if (visible.size() != points3d.size()) {
      throw std::invalid_argument("observation: visibility frame mismatch");
    }
    for (const auto& f : points3d) check_joints(f.size(), "3d");
  } else if (kind == ObservationKind::kJoints2d) {
    if (confidences.size() != points2d.size() ||
        visible.size() != points2d.size()) {
      throw std::invalid_argument("observation: 2d frame arrays mismatch");
    }
    for (const auto& f : points2d) check_joints(f.size(), "2d");
    for (const auto& f : confidences) {
      for (double c : f) {
        if (c < 0.0 || c > 1.0) {
          throw std::invalid_argument("observation: confidence outside [0,1]");
        }
      }
    }
  }
}

Observation Observation::joints3d(std::vector<std::vector<Vec3>> positions) {
  Observation obs;
  obs.kind = ObservationKind::kJoints3d;
  obs.visible.assign(positions.size(),
                     std::vector<bool>(positions.empty() ? 0
                                                         : positions[0].size(),
                                       true));
  obs.points3d = std::move(positions);
  return obs;
}

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec2_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec3 vec_from_json(const json& j) {
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec2 vec2_from_json(const json& j) {
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

std::string observation_to_json(const Observation& obs) {
  json j;
  switch (obs.kind) {
    case ObservationKind::kJoints3d:
      j["kind"] = "joints3d";
      break;
    case ObservationKind::kJoints2d:
      j["kind"] = "joints2d";
      break;
    case ObservationKind::kPointCloud:
      j["kind"] = "pointcloud";
      break;
  }
  if (obs.camera.has_value()) {
    const PinholeCamera& cam = *obs.camera;
    json c;
    c["fx"] = cam.fx;
    c["fy"] = cam.fy;
    c["cx"] = cam.cx;
    c["cy"] = cam.cy;
    const Vec4 q = quat_encode(cam.rotation);
    c["rotation"] = json::array({q[0], q[1], q[2], q[3]});
    c["translation"] = vec_to_json(cam.translation);
    j["camera"] = c;
  }
  json frames = json::array();
  const int t_max = obs.num_frames();
  for (int t = 0; t < t_max; ++t) {
    json f;
    if (obs.kind == ObservationKind::kJoints3d) {
      json pts = json::array();
      for (const auto& p : obs.points3d[t]) pts.push_back(vec_to_json(p));
      f["points"] = pts;
      f["visible"] = obs.visible[t];
    } else if (obs.kind == ObservationKind::kJoints2d) {
      json pts = json::array();
      for (const auto& p : obs.points2d[t]) pts.push_back(vec2_to_json(p));
      f["points"] = pts;
      f["confidences"] = obs.confidences[t];
      f["visible"] = obs.visible[t];
    } else {
      json pts = json::array();
      for (const auto& p : obs.clouds[t]) pts.push_back(vec_to_json(p));
      f["points"] = pts;
    }
    frames.push_back(f);
  }
  j["frames"] = frames;
  return j.dump() + "\n";
}

Observation observation_from_json(const std::string& text) {
  const json j = json::parse(text);
  Observation obs;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "joints3d") {
    obs.kind = ObservationKind::kJoints3d;
  } else if (kind == "joints2d") {
    obs.kind = ObservationKind::kJoints2d;
  } else if (kind == "pointcloud") {
    obs.kind = ObservationKind::kPointCloud;
  } else {
    throw std::runtime_error("observation file: unknown kind " + kind);
  }
  if (j.contains("camera")) {
    const json& c = j["camera"];
    PinholeCamera cam;
    cam.fx = c.at("fx").get<double>();
    cam.fy = c.at("fy").get<double>();
    cam.cx = c.at("cx").get<double>();
    cam.cy = c.at("cy").get<double>();
    const json& q = c.at("rotation");
    cam.rotation = quat_decode(Vec4(q[0].get<double>(), q[1].get<double>(),
                                    q[2].get<double>(), q[3].get<double>()));
    cam.translation = vec_from_json(c.at("translation"));
    obs.camera = cam;
  }
  for (const auto& f : j.at("frames")) {
    if (obs.kind == ObservationKind::kJoints3d) {
      std::vector<Vec3> pts;
      for (const auto& p : f.at("points")) pts.push_back(vec_from_json(p));
      obs.points3d.push_back(std::move(pts));
      obs.visible.push_back(f.at("visible").get<std::vector<bool>>());
    } else if (obs.kind == ObservationKind::kJoints2d) {
      std::vector<Vec2> pts;
      for (const auto& p : f.at("points")) pts.push_back(vec2_from_json(p));
      obs.points2d.push_back(std::move(pts));
      obs.confidences.push_back(f.at("confidences").get<std::vector<double>>());
      obs.visible.push_back(f.at("visible").get<std::vector<bool>>());
    } else {
      std::vector<Vec3> pts;
      for (const auto& p : f.at("points")) pts.push_back(vec_from_json(p));
      obs.clouds.push_back(std::move(pts));
    }
  }
  return obs;
}

void write_observation_file(const std::string& path, const Observation& obs) {
  write_text_file(path, observation_to_json(obs));
}

Observation read_observation_file(const std::string& path) {
  return observation_from_json(read_text_file(path));
}

}  // namespace rmf
