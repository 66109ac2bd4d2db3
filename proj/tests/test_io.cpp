#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "rmf/motion_io.hpp"
#include "rmf/observation.hpp"

using namespace rmf;

namespace {

MotionFile make_motion(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MotionFile m;
  m.skel = Skeleton::chain(3);
  m.seq.fps = 30.0;
  std::vector<Pose> poses;
  std::vector<Vec3> roots;
  std::normal_distribution<double> g(0.0, 0.3);
  for (int t = 0; t < 6; ++t) {
    poses.push_back(random_pose(rng, 3));
    roots.push_back(Vec3(g(rng), g(rng), g(rng)));
  }
  m.seq = rebuild_states(poses, roots, 30.0);
  return m;
}

}  // namespace

TEST_CASE("motion json round trip") {
  const MotionFile m = make_motion(7);
  const MotionFile back = motion_from_json(motion_to_json(m));
  REQUIRE(back.seq.num_frames() == m.seq.num_frames());
  CHECK(back.seq.fps == m.seq.fps);
  CHECK(back.skel.parent == m.skel.parent);
  for (int t = 0; t < m.seq.num_frames(); ++t) {
    CHECK(pose_distance(back.seq.states[t].pose, m.seq.states[t].pose) <
          1e-9);
    CHECK((back.seq.states[t].t_r - m.seq.states[t].t_r).norm() < 1e-12);
    for (int j = 0; j < 3; ++j) {
      CHECK((back.seq.states[t].vel[j] - m.seq.states[t].vel[j]).norm() <
            1e-12);
      CHECK((back.seq.states[t].acc[j] - m.seq.states[t].acc[j]).norm() <
            1e-12);
    }
  }
}

TEST_CASE("motion serialization round-trips numerically") {
  const MotionFile m = make_motion(11);
  const std::string a = motion_to_json(m);
  const MotionFile once = motion_from_json(a);
  const MotionFile twice = motion_from_json(motion_to_json(once));
  for (int t = 0; t < m.seq.num_frames(); ++t) {
    for (int j = 0; j < 3; ++j) {
      CHECK((once.seq.states[t].pose[j] - twice.seq.states[t].pose[j])
                .norm() < 1e-12);
    }
  }
}

TEST_CASE("motion reader rejects non-unit quaternions") {
  const MotionFile m = make_motion(13);
  std::string text = motion_to_json(m);
  nlohmann::json j = nlohmann::json::parse(text);
  j["frames"][0]["quats"][0][0] = 2.0;
  CHECK_THROWS(motion_from_json(j.dump()));
}

TEST_CASE("motion file round trip on disk") {
  const MotionFile m = make_motion(17);
  const auto path =
      (std::filesystem::temp_directory_path() / "rmf_io_test_motion.json")
          .string();
  write_motion_file(path, m);
  const MotionFile back = read_motion_file(path);
  CHECK(pose_distance(back.seq.states[0].pose, m.seq.states[0].pose) < 1e-9);
  std::remove(path.c_str());
  CHECK_THROWS(read_motion_file(path));
}

TEST_CASE("observation json round trip: joints3d") {
  Observation obs = Observation::joints3d(
      {{Vec3(0, 0, 0), Vec3(0, 1, 0)}, {Vec3(0.1, 0, 0), Vec3(0.1, 1, 0)}});
  obs.visible[1][1] = false;
  const Observation back = observation_from_json(observation_to_json(obs));
  CHECK(back.kind == ObservationKind::kJoints3d);
  REQUIRE(back.num_frames() == 2);
  CHECK((back.points3d[1][0] - Vec3(0.1, 0, 0)).norm() < 1e-12);
  CHECK(back.visible[1][1] == false);
  CHECK(back.visible[0][0] == true);
}

TEST_CASE("observation json round trip: joints2d with camera") {
  Observation obs;
  obs.kind = ObservationKind::kJoints2d;
  PinholeCamera cam;
  cam.fx = 500.0;
  cam.cx = 320.0;
  cam.rotation = exp_so3(Vec3(0.1, 0.2, 0.3));
  cam.translation = Vec3(0, 0, 2);
  obs.camera = cam;
  obs.points2d = {{Vec2(1.5, -2.5)}};
  obs.confidences = {{0.8}};
  obs.visible = {{true}};
  const Observation back = observation_from_json(observation_to_json(obs));
  CHECK(back.kind == ObservationKind::kJoints2d);
  REQUIRE(back.camera.has_value());
  CHECK(back.camera->fx == 500.0);
  CHECK((back.camera->rotation - cam.rotation).norm() < 1e-12);
  CHECK(back.confidences[0][0] == 0.8);
  CHECK((back.points2d[0][0] - Vec2(1.5, -2.5)).norm() < 1e-12);
}

TEST_CASE("observation json round trip: point cloud") {
  Observation obs;
  obs.kind = ObservationKind::kPointCloud;
  obs.clouds = {{Vec3(1, 2, 3), Vec3(4, 5, 6)}, {}};
  const Observation back = observation_from_json(observation_to_json(obs));
  CHECK(back.kind == ObservationKind::kPointCloud);
  REQUIRE(back.clouds.size() == 2);
  CHECK(back.clouds[1].empty());
  CHECK((back.clouds[0][1] - Vec3(4, 5, 6)).norm() < 1e-12);
}

TEST_CASE("observation validation") {
  Observation obs = Observation::joints3d({{Vec3(0, 0, 0)}});
  CHECK_NOTHROW(obs.validate(1));
  CHECK_THROWS(obs.validate(2));
  Observation bad;
  bad.kind = ObservationKind::kJoints2d;  // no camera
  bad.points2d = {{Vec2(0, 0)}};
  bad.confidences = {{1.0}};
  bad.visible = {{true}};
  CHECK_THROWS(bad.validate(1));
}
