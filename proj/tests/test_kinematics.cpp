#include <doctest.h>

#include <cmath>

#include "rmf/motion.hpp"
#include "rmf/skeleton.hpp"

using namespace rmf;

namespace {

// Smooth two-joint Lissajous-style trajectory.
Pose lissajous(double t) {
  Pose p(2);
  p[0] = exp_so3(Vec3(0.6 * std::sin(2.0 * t), 0.4 * std::cos(3.0 * t), 0.0));
  p[1] = exp_so3(Vec3(0.0, 0.5 * std::sin(1.7 * t), 0.3 * std::cos(2.3 * t)));
  return p;
}

std::vector<Pose> sample_poses(double fps, int frames,
                               Pose (*curve)(double)) {
  std::vector<Pose> out;
  for (int t = 0; t < frames; ++t) out.push_back(curve(t / fps));
  return out;
}

}  // namespace

TEST_CASE("velocity of constant and geodesic sequences") {
  std::mt19937_64 rng(61);
  const std::vector<Pose> constant(10, random_pose(rng, 2));
  for (const auto& v :
       estimate_velocity(constant, 30.0, VelocityScheme::kLogCentral)) {
    CHECK(velocity_norm(v) < 1e-12);
  }

  // Geodesic R(t) = exp(t hat(w)): log-central is exact up to float error.
  const Vec3 w(0.5, 0, 0);
  std::vector<Pose> geo;
  for (int t = 0; t < 20; ++t) geo.push_back({exp_so3((t / 30.0) * w)});
  const auto vels = estimate_velocity(geo, 30.0, VelocityScheme::kLogCentral);
  for (int t = 1; t + 1 < 20; ++t) CHECK((vels[t][0] - w).norm() < 1e-6);
  // Endpoints are one-sided first order: still exact on a geodesic.
  CHECK((vels[0][0] - w).norm() < 1e-6);
  CHECK((vels[19][0] - w).norm() < 1e-6);
}

TEST_CASE("velocity schemes agree on smooth motion") {
  const auto poses = sample_poses(60.0, 120, lissajous);
  const auto a = estimate_velocity(poses, 60.0, VelocityScheme::kLogCentral);
  const auto b = estimate_velocity(poses, 60.0, VelocityScheme::kMatrixCentral);
  double num = 0.0, den = 0.0;
  for (int t = 1; t + 1 < 120; ++t) {
    for (int j = 0; j < 2; ++j) {
      num += (a[t][j] - b[t][j]).norm();
      den += a[t][j].norm();
    }
  }
  CHECK(num / den < 0.01);
}

TEST_CASE("acceleration on analytic curves") {
  // Constant-velocity geodesic: zero acceleration.
  const Vec3 w(0.3, -0.2, 0.1);
  std::vector<Pose> geo;
  for (int t = 0; t < 30; ++t) geo.push_back({exp_so3((t / 30.0) * w)});
  const auto vels = estimate_velocity(geo, 30.0, VelocityScheme::kLogCentral);
  const auto accs = estimate_acceleration(vels, 30.0, AccelScheme::kCentral);
  for (int t = 1; t + 1 < 30; ++t) CHECK(accs[t][0].norm() < 1e-6 * 30.0);

  // phi(t) = 0.5 t^2 about x: alpha = 1 rad/s^2.
  std::vector<Pose> quad;
  for (int t = 0; t < 60; ++t) {
    const double tt = t / 30.0;
    quad.push_back({exp_so3(Vec3(0.5 * tt * tt, 0, 0))});
  }
  const auto qv = estimate_velocity(quad, 30.0, VelocityScheme::kLogCentral);
  const auto qa = estimate_acceleration(qv, 30.0, AccelScheme::kCentral);
  for (int t = 2; t + 2 < 60; ++t) {
    const double tt = t / 30.0;
    CHECK((qv[t][0] - Vec3(tt, 0, 0)).norm() < 1e-3);
    CHECK((qa[t][0] - Vec3(1, 0, 0)).norm() < 1e-2);
  }
}

TEST_CASE("acceleration schemes agree within 5% on smooth motion") {
  const auto poses = sample_poses(60.0, 120, lissajous);
  const auto vels = estimate_velocity(poses, 60.0, VelocityScheme::kLogCentral);
  const auto a = estimate_acceleration(vels, 60.0, AccelScheme::kCentral);
  const auto b =
      estimate_acceleration(vels, 60.0, AccelScheme::kLogTransport, &poses);
  double num = 0.0, den = 0.0;
  for (int t = 1; t + 1 < 120; ++t) {
    for (int j = 0; j < 2; ++j) {
      num += (a[t][j] - b[t][j]).norm();
      den += a[t][j].norm();
    }
  }
  CHECK(num / den < 0.05);
}

TEST_CASE("velocity is left-equivariant") {
  const auto poses = sample_poses(30.0, 40, lissajous);
  std::mt19937_64 rng(67);
  const Mat3 fixed = random_rotation(rng);
  std::vector<Pose> rotated = poses;
  for (auto& p : rotated)
    for (auto& r : p) r = fixed * r;
  const auto a = estimate_velocity(poses, 30.0, VelocityScheme::kLogCentral);
  const auto b = estimate_velocity(rotated, 30.0, VelocityScheme::kLogCentral);
  for (int t = 0; t < 40; ++t) {
    for (int j = 0; j < 2; ++j) CHECK((a[t][j] - b[t][j]).norm() < 1e-10);
  }
}

TEST_CASE("estimators require 3 frames") {
  std::vector<Pose> two(2, identity_pose(1));
  CHECK_THROWS_AS(estimate_velocity(two, 30.0, VelocityScheme::kLogCentral),
                  std::invalid_argument);
  std::vector<PoseVelocity> twov(2, zero_velocity(1));
  CHECK_THROWS_AS(estimate_acceleration(twov, 30.0, AccelScheme::kCentral),
                  std::invalid_argument);
}

TEST_CASE("forward kinematics") {
  const Skeleton chain = Skeleton::chain(3);
  // Identity pose: cumulative rest offsets.
  const auto rest = forward_kinematics(chain, Vec3::Zero(), identity_pose(3));
  CHECK((rest[0] - Vec3(0, 0, 0)).norm() < 1e-15);
  CHECK((rest[1] - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((rest[2] - Vec3(0, 2, 0)).norm() < 1e-15);

  // Root rotated pi/2 about z sends the (0,1,0) offset to (-1,0,0).
  const Skeleton two = Skeleton::chain(2);
  Pose p = identity_pose(2);
  p[0] = exp_so3(Vec3(0, 0, M_PI / 2));
  const auto pos = forward_kinematics(two, Vec3::Zero(), p);
  CHECK((pos[1] - Vec3(-1, 0, 0)).norm() < 1e-12);

  // Uniform beta = 2 doubles every bone vector.
  Skeleton scaled = chain;
  scaled.beta.assign(3, 2.0);
  const auto big = forward_kinematics(scaled, Vec3::Zero(), identity_pose(3));
  CHECK((big[2] - Vec3(0, 4, 0)).norm() < 1e-14);
}

TEST_CASE("bone lengths invariant under pose") {
  const Skeleton chain = Skeleton::chain(4);
  const auto rest = forward_kinematics(chain, Vec3::Zero(), identity_pose(4));
  const auto rest_len = bone_lengths(chain, rest);
  for (double l : rest_len) CHECK(l == doctest::Approx(1.0));

  std::mt19937_64 rng(71);
  for (int i = 0; i < 20; ++i) {
    const auto pts =
        forward_kinematics(chain, Vec3(0.3, -0.2, 0.9), random_pose(rng, 4));
    const auto lens = bone_lengths(chain, pts);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(lens[j] - rest_len[j]) < 1e-12);
  }
}

TEST_CASE("skeleton validation rejects bad parents") {
  Skeleton bad;
  bad.parent = {-1, 2, 1};  // parent index not less than child
  bad.offsets = {Vec3::Zero(), Vec3(0, 1, 0), Vec3(0, 1, 0)};
  bad.beta = {1, 1, 1};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("canonicalize") {
  std::mt19937_64 rng(73);
  MotionSequence seq;
  seq.fps = 30.0;
  for (int t = 0; t < 8; ++t) {
    MotionState s;
    s.t_r = Vec3(t * 0.1, 0.2, -0.3);
    s.pose = random_pose(rng, 3);
    s.vel = zero_velocity(3);
    s.acc = zero_velocity(3);
    seq.states.push_back(s);
  }
  const MotionSequence canon = canonicalize(seq);
  CHECK((canon.states[0].pose[0] - Mat3::Identity()).norm() < 1e-12);
  CHECK(canon.states[0].t_r.norm() < 1e-12);
  // Isometry: pairwise pose distances unchanged.
  for (int a = 0; a < 8; ++a) {
    for (int b = a + 1; b < 8; ++b) {
      CHECK(std::abs(pose_distance(seq.states[a].pose, seq.states[b].pose) -
                     pose_distance(canon.states[a].pose,
                                   canon.states[b].pose)) < 1e-12);
    }
  }
  // Idempotent; and pre-rotating the input leaves the canonical form fixed.
  const MotionSequence twice = canonicalize(canon);
  MotionSequence rotated = seq;
  const Mat3 fixed = random_rotation(rng);
  for (auto& s : rotated.states) s.pose[0] = fixed * s.pose[0];
  const MotionSequence canon2 = canonicalize(rotated);
  for (int t = 0; t < 8; ++t) {
    CHECK(pose_distance(twice.states[t].pose, canon.states[t].pose) < 1e-7);
    CHECK(pose_distance(canon2.states[t].pose, canon.states[t].pose) < 1e-7);
  }
}

TEST_CASE("rebuild_states fills estimates") {
  const Vec3 w(0.4, 0, 0);
  std::vector<Pose> geo;
  std::vector<Vec3> roots;
  for (int t = 0; t < 12; ++t) {
    geo.push_back({exp_so3((t / 30.0) * w)});
    roots.push_back(Vec3::Zero());
  }
  const MotionSequence seq = rebuild_states(geo, roots, 30.0);
  for (int t = 1; t + 1 < 12; ++t) {
    CHECK((seq.states[t].vel[0] - w).norm() < 1e-6);
    CHECK(seq.states[t].acc[0].norm() < 1e-4);
  }
}

TEST_CASE("fk_backward matches finite differences") {
  const Skeleton chain = Skeleton::chain(3);
  std::mt19937_64 rng(79);
  std::normal_distribution<double> g(0.0, 1.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Pose pose = random_pose(rng, 3);
    const Vec3 t_r(g(rng), g(rng), g(rng));
    const FkResult fk = forward_kinematics_full(chain, t_r, pose);
    std::vector<Vec3> d_pos(3);
    for (auto& v : d_pos) v = Vec3(g(rng), g(rng), g(rng));
    const auto loss = [&](const Skeleton& s, const Vec3& root,
                          const Pose& p) {
      const auto pts = forward_kinematics(s, root, p);
      double sum = 0.0;
      for (int j = 0; j < 3; ++j) sum += d_pos[j].dot(pts[j]);
      return sum;
    };
    const FkGradient grad = fk_backward(chain, pose, fk, d_pos);

    for (int j = 0; j < 3; ++j) {
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 u = Vec3::Zero();
        u[axis] = h;
        Pose fwd = pose, bwd = pose;
        fwd[j] = pose[j] * exp_so3(u);
        bwd[j] = pose[j] * exp_so3(-u);
        const double fd =
            (loss(chain, t_r, fwd) - loss(chain, t_r, bwd)) / (2.0 * h);
        CHECK(std::abs(fd - grad.d_pose[j][axis]) <
              1e-5 * (1.0 + std::abs(fd)));
      }
      Skeleton up = chain, dn = chain;
      up.beta[j] += h;
      dn.beta[j] -= h;
      const double fd_b =
          (loss(up, t_r, pose) - loss(dn, t_r, pose)) / (2.0 * h);
      CHECK(std::abs(fd_b - grad.d_beta[j]) < 1e-5 * (1.0 + std::abs(fd_b)));
    }
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 u = Vec3::Zero();
      u[axis] = h;
      const double fd =
          (loss(chain, t_r + u, pose) - loss(chain, t_r - u, pose)) / (2.0 * h);
      CHECK(std::abs(fd - grad.d_t_r[axis]) < 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}
