#include <doctest.h>

#include <cmath>

#include "rmf/pose.hpp"

using namespace rmf;

TEST_CASE("pose_distance is the L1 sum of joint distances") {
  std::mt19937_64 rng(41);
  const Pose a = random_pose(rng, 3);
  CHECK(pose_distance(a, a) == doctest::Approx(0.0));

  Pose p = identity_pose(2), q = identity_pose(2);
  q[0] = exp_so3(Vec3(M_PI / 4, 0, 0));
  q[1] = exp_so3(Vec3(0, M_PI / 2, 0));
  CHECK(pose_distance(p, q) == doctest::Approx(3.0 * M_PI / 4.0));

  for (int i = 0; i < 50; ++i) {
    const Pose x = random_pose(rng, 4), y = random_pose(rng, 4);
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += geodesic_distance(x[j], y[j]);
    CHECK(std::abs(pose_distance(x, y) - sum) < 1e-12);
    CHECK(std::abs(pose_distance(x, y) - pose_distance(y, x)) < 1e-12);
  }
}

TEST_CASE("pose_distance metric axioms") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng, 3), b = random_pose(rng, 3),
               c = random_pose(rng, 3);
    CHECK(pose_distance(a, c) <=
          pose_distance(a, b) + pose_distance(b, c) + 1e-9);
  }
}

TEST_CASE("pose_exp and pose_log") {
  const Pose base = identity_pose(1);
  PoseVelocity zero = zero_velocity(1);
  CHECK(pose_distance(pose_exp(base, zero), base) == doctest::Approx(0.0));

  PoseVelocity step = {Vec3(M_PI / 3, 0, 0)};
  const Pose stepped = pose_exp(base, step);
  CHECK((stepped[0] - exp_so3(Vec3(M_PI / 3, 0, 0))).norm() < 1e-12);

  Pose target = identity_pose(1);
  target[0] = exp_so3(Vec3(0.2, 0, 0));
  const PoseVelocity lg = pose_log(identity_pose(1), target);
  CHECK((lg[0] - Vec3(0.2, 0, 0)).norm() < 1e-12);

  std::mt19937_64 rng(47);
  std::normal_distribution<double> g(0.0, 0.4);
  for (int i = 0; i < 100; ++i) {
    const Pose b = random_pose(rng, 3);
    PoseVelocity v(3);
    for (auto& x : v) x = Vec3(g(rng), g(rng), g(rng));
    const PoseVelocity back = pose_log(b, pose_exp(b, v));
    for (int j = 0; j < 3; ++j) CHECK((back[j] - v[j]).norm() < 1e-8);
  }
}

TEST_CASE("pose_log norm equals per-joint geodesic distance") {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 50; ++i) {
    const Pose a = random_pose(rng, 3), b = random_pose(rng, 3);
    const PoseVelocity lg = pose_log(a, b);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(lg[j].norm() - geodesic_distance(a[j], b[j])) < 1e-9);
    }
  }
}

TEST_CASE("pose_rgrad is componentwise") {
  Pose p = identity_pose(2);
  std::vector<Mat3> egrads(2, Mat3::Zero());
  Mat3 sym;
  sym << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  egrads[0] = sym;
  egrads[1] = sym;
  const PoseTangent zero_t = pose_rgrad(p, egrads);
  CHECK(zero_t[0].isZero(1e-14));
  CHECK(zero_t[1].isZero(1e-14));

  egrads[0] = Mat3::Zero();
  egrads[1] = hat(Vec3(1, 0, 0));
  const PoseTangent one_joint = pose_rgrad(p, egrads);
  CHECK(one_joint[0].isZero(0.0));
  CHECK(!one_joint[1].isZero(1e-14));

  std::mt19937_64 rng(59);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Pose r = random_pose(rng, 3);
    std::vector<Mat3> eg(3);
    for (auto& m : eg)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m(a, b) = g(rng);
    const PoseTangent t = pose_rgrad(r, eg);
    for (int j = 0; j < 3; ++j) {
      CHECK((t[j] - egrad2rgrad(r[j], eg[j])).norm() < 1e-14);
      // Tangency: r^T t skew.
      CHECK((Mat3(r[j].transpose() * t[j]) +
             Mat3(t[j].transpose() * r[j]))
                .norm() < 1e-10);
    }
  }
}

TEST_CASE("mismatched K throws") {
  CHECK_THROWS_AS(pose_distance(identity_pose(2), identity_pose(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(pose_exp(identity_pose(2), zero_velocity(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(pose_log(identity_pose(1), identity_pose(2)),
                  std::invalid_argument);
}
