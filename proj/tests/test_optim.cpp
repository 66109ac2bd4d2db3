#include <doctest.h>

#include <cmath>

#include "rmf/optimize.hpp"

using namespace rmf;

namespace {

std::vector<std::vector<Vec3>> fk_all(const Skeleton& skel,
                                      const std::vector<Vec3>& roots,
                                      const std::vector<Pose>& poses) {
  std::vector<std::vector<Vec3>> out;
  for (std::size_t t = 0; t < poses.size(); ++t) {
    out.push_back(forward_kinematics(skel, roots[t], poses[t]));
  }
  return out;
}

MotionSequence toy_motion(int k, int frames, double fps, std::uint64_t seed) {
  const SynthMotionSpec spec = SynthMotionSpec::toy(k, seed);
  const CorpusSplit split = synth_corpus(spec, 2);
  std::vector<Pose> poses(split.train.poses.begin(),
                          split.train.poses.begin() + frames);
  std::vector<Vec3> roots(frames, Vec3::Zero());
  return rebuild_states(poses, roots, fps);
}

}  // namespace

TEST_CASE("loss_data_3d basics") {
  const Skeleton skel = Skeleton::chain(2);
  std::vector<Vec3> roots(3, Vec3::Zero());
  std::vector<Pose> poses(3, identity_pose(2));
  const auto positions = fk_all(skel, roots, poses);

  Observation obs = Observation::joints3d(positions);
  CHECK(loss_data_3d(positions, obs).value == doctest::Approx(0.0));

  // One joint offset by 0.1 along x: a single squared term.
  auto shifted = positions;
  shifted[1][1] += Vec3(0.1, 0, 0);
  const PositionLoss l = loss_data_3d(shifted, obs);
  CHECK(l.value == doctest::Approx(0.01));
  CHECK((l.d_positions[1][1] - Vec3(0.2, 0, 0)).norm() < 1e-12);

  // Independent double-loop oracle on random offsets.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 0.2);
  auto noisy = positions;
  for (auto& frame : noisy)
    for (auto& p : frame) p += Vec3(g(rng), g(rng), g(rng));
  double expected = 0.0;
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 2; ++j)
      expected += (noisy[t][j] - positions[t][j]).squaredNorm();
  CHECK(loss_data_3d(noisy, obs).value == doctest::Approx(expected));
}

TEST_CASE("loss_data_2d geman-mcclure") {
  PinholeCamera cam;  // unit focal, principal point (0,0), identity extrinsics
  // Joint at (0,0,1) projects to (0,0).
  bool behind = false;
  CHECK(cam.project(Vec3(0, 0, 1), &behind).norm() == doctest::Approx(0.0));
  CHECK(!behind);
  cam.project(Vec3(0, 0, -1), &behind);
  CHECK(behind);

  // rho(|r| = c) = 1/2.
  Observation obs;
  obs.kind = ObservationKind::kJoints2d;
  obs.camera = cam;
  obs.points2d = {{Vec2(0.0, 0.0)}};
  obs.confidences = {{1.0}};
  obs.visible = {{true}};
  const double c = 100.0;
  std::vector<std::vector<Vec3>> positions = {{Vec3(c, 0, 1)}};
  const PositionLoss l = loss_data_2d(positions, obs, c);
  CHECK(l.value == doctest::Approx(0.5));

  // Perfect reprojection → 0.
  positions = {{Vec3(0, 0, 1)}};
  CHECK(loss_data_2d(positions, obs, c).value == doctest::Approx(0.0));
}

TEST_CASE("loss_data_2d gradient matches finite differences") {
  PinholeCamera cam;
  cam.fx = 500.0;
  cam.fy = 480.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.rotation = exp_so3(Vec3(0.1, -0.2, 0.3));
  cam.translation = Vec3(0.05, -0.1, 2.0);
  Observation obs;
  obs.kind = ObservationKind::kJoints2d;
  obs.camera = cam;
  obs.points2d = {{Vec2(300.0, 260.0), Vec2(350.0, 200.0)}};
  obs.confidences = {{0.9, 0.7}};
  obs.visible = {{true, true}};
  std::vector<std::vector<Vec3>> positions = {
      {Vec3(0.2, 0.1, 0.4), Vec3(-0.3, 0.2, 0.1)}};
  const PositionLoss l = loss_data_2d(positions, obs, 100.0);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      auto up = positions, dn = positions;
      up[0][j][axis] += h;
      dn[0][j][axis] -= h;
      const double fd = (loss_data_2d(up, obs, 100.0).value -
                         loss_data_2d(dn, obs, 100.0).value) /
                        (2.0 * h);
      CHECK(std::abs(fd - l.d_positions[0][j][axis]) <
            1e-4 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("loss_data_pc bisquare chamfer") {
  const Skeleton skel = Skeleton::chain(2);
  std::vector<Vec3> roots(1, Vec3::Zero());
  std::vector<Pose> poses(1, identity_pose(2));
  const auto positions = fk_all(skel, roots, poses);

  Observation obs;
  obs.kind = ObservationKind::kPointCloud;
  obs.clouds = {{positions[0][0], positions[0][1]}};
  CHECK(loss_data_pc(positions, obs, 0.2).value == doctest::Approx(0.0));

  // An outlier beyond the cutoff contributes nothing.
  obs.clouds = {{positions[0][0], Vec3(10, 10, 10)}};
  CHECK(loss_data_pc(positions, obs, 0.2).value == doctest::Approx(0.0));

  // Brute-force nearest-joint oracle on a random cloud.
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g(0.0, 0.1);
  obs.clouds = {{}};
  for (int i = 0; i < 20; ++i) {
    obs.clouds[0].push_back(positions[0][i % 2] + Vec3(g(rng), g(rng), g(rng)));
  }
  const double c = 0.2;
  double expected = 0.0;
  for (const Vec3& o : obs.clouds[0]) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j) {
      best = std::min(best, (positions[0][j] - o).squaredNorm());
    }
    const double u = best / (c * c);
    if (u < 1.0) expected += (1.0 - u) * (1.0 - u) * best;
  }
  CHECK(loss_data_pc(positions, obs, c).value == doctest::Approx(expected));
}

TEST_CASE("regularizers") {
  const Skeleton skel = Skeleton::chain(3);
  std::vector<Vec3> roots(2, Vec3::Zero());
  std::vector<Pose> poses(2, identity_pose(3));
  const auto still = fk_all(skel, roots, poses);
  CHECK(loss_smooth(still).value == doctest::Approx(0.0));
  CHECK(loss_bone_length(skel, still).value == doctest::Approx(0.0));

  // FK output preserves bone lengths, so L_bl vanishes for any motion.
  std::mt19937_64 rng(41);
  std::vector<Pose> moving = {random_pose(rng, 3), random_pose(rng, 3)};
  const auto fkm = fk_all(skel, roots, moving);
  CHECK(loss_bone_length(skel, fkm).value < 1e-20);

  // Hand-built 2-frame toy for smoothness.
  std::vector<std::vector<Vec3>> two = {{Vec3(0, 0, 0)}, {Vec3(0.3, 0.4, 0)}};
  CHECK(loss_smooth(two).value == doctest::Approx(0.25));
}

TEST_CASE("contact loss hand computations") {
  // Stationary joint at height 0 with c = 1: all three terms vanish.
  std::vector<std::vector<Vec3>> still(2, {Vec3(0, 1, 0)});
  std::vector<PoseVelocity> vels(2, zero_velocity(1));
  ContactWeights w{1.0, 1.0, 1.0, 0.05};
  const ContactLoss quiet =
      loss_contact(still, vels, {0}, {{1.0}, {1.0}}, w);
  CHECK(quiet.value == doctest::Approx(0.0));

  // Sliding 0.05 m with c = 1, lambda_cj = 1: 0.0025.
  std::vector<std::vector<Vec3>> slide = {{Vec3(0, 0, 0)},
                                          {Vec3(0.05, 0, 0)}};
  ContactWeights only_joint{1.0, 0.0, 0.0, 0.05};
  const ContactLoss sliding =
      loss_contact(slide, vels, {0}, {{1.0}, {1.0}}, only_joint);
  CHECK(sliding.value == doctest::Approx(0.0025));

  // c = 0 disables everything.
  const ContactLoss off = loss_contact(slide, vels, {0}, {{0.0}, {0.0}}, w);
  CHECK(off.value == doctest::Approx(0.0));
}

TEST_CASE("stage energies are ordered and consistent") {
  const Skeleton skel = Skeleton::chain(2);
  const MotionSequence motion = toy_motion(2, 6, 30.0, 101);
  std::vector<Vec3> roots(6, Vec3::Zero());
  const auto positions = fk_all(skel, roots, motion.poses());
  const Observation obs = Observation::joints3d(positions);

  SequenceVars vars;
  vars.poses = motion.poses();
  vars.roots = roots;
  vars.beta = skel.beta;

  const AnalyticIdentityField pose_field(2);
  std::vector<Eigen::VectorXd> vel_set = {Eigen::VectorXd::Zero(6)};
  const AnalyticSetField vel_field(vel_set, FieldKind::kVelocity, 2);
  const AnalyticSetField acc_field(vel_set, FieldKind::kAcceleration, 2);
  FieldSet fields{&pose_field, &vel_field, &acc_field};

  EnergyWeights w;
  const double e1 = energy(vars, Stage::kOne, obs, skel, w, fields, 30.0);
  const double e2 = energy(vars, Stage::kTwo, obs, skel, w, fields, 30.0);
  CHECK(e2 >= e1);  // stage II only adds nonnegative prior terms

  // Perfect data fit with zero prior weights gives zero energy.
  EnergyWeights data_only;
  data_only.beta = data_only.pose_prior = data_only.smooth = 0.0;
  data_only.bone_length = data_only.vel_prior = data_only.acc_prior = 0.0;
  CHECK(energy(vars, Stage::kOne, obs, skel, data_only, fields, 30.0) ==
        doctest::Approx(0.0));
}

TEST_CASE("energy gradient matches finite differences") {
  const Skeleton skel = Skeleton::chain(2);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g(0.0, 0.1);

  const AnalyticIdentityField pose_field(2);
  std::vector<Eigen::VectorXd> origin = {Eigen::VectorXd::Zero(6)};
  const AnalyticSetField vel_field(origin, FieldKind::kVelocity, 2);
  const AnalyticSetField acc_field(origin, FieldKind::kAcceleration, 2);
  FieldSet fields{&pose_field, &vel_field, &acc_field};

  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const int frames = 3;
    SequenceVars vars;
    for (int t = 0; t < frames; ++t) {
      vars.poses.push_back(random_pose(rng, 2));
      vars.roots.push_back(Vec3(g(rng), g(rng), g(rng)));
    }
    vars.beta = {1.0 + g(rng), 1.0 + g(rng)};

    // Random observation so the data gradient is nonzero.
    std::vector<std::vector<Vec3>> target;
    for (int t = 0; t < frames; ++t) {
      std::vector<Vec3> frame;
      for (int j = 0; j < 2; ++j) frame.push_back(Vec3(g(rng), g(rng), g(rng)));
      target.push_back(frame);
    }
    const Observation obs = Observation::joints3d(target);

    EnergyWeights w;
    w.contact_joint = 0.0;  // contact probs are non-differentiable gates
    const Stage stage = trial % 2 == 0 ? Stage::kOne : Stage::kTwo;
    const EnergyGradient grad =
        energy_gradient(vars, stage, obs, skel, w, fields, 30.0);
    const auto eval = [&](const SequenceVars& v) {
      return energy(v, stage, obs, skel, w, fields, 30.0);
    };

    // Spot-check a few coordinates per instance to keep runtime bounded.
    const int t = trial % frames;
    const int j = trial % 2;
    for (int axis = 0; axis < 3; ++axis) {
      SequenceVars up = vars, dn = vars;
      Vec3 u = Vec3::Zero();
      u[axis] = h;
      up.poses[t][j] = vars.poses[t][j] * exp_so3(u);
      dn.poses[t][j] = vars.poses[t][j] * exp_so3(-u);
      const double fd = (eval(up) - eval(dn)) / (2.0 * h);
      CHECK(std::abs(fd - grad.d_pose[t][j][axis]) <
            1e-4 * (1.0 + std::abs(fd)));

      up = dn = vars;
      up.roots[t][axis] += h;
      dn.roots[t][axis] -= h;
      const double fd_r = (eval(up) - eval(dn)) / (2.0 * h);
      CHECK(std::abs(fd_r - grad.d_root[t][axis]) <
            1e-4 * (1.0 + std::abs(fd_r)));
    }
    SequenceVars up = vars, dn = vars;
    up.beta[j] += h;
    dn.beta[j] -= h;
    const double fd_b = (eval(up) - eval(dn)) / (2.0 * h);
    CHECK(std::abs(fd_b - grad.d_beta[j]) < 1e-4 * (1.0 + std::abs(fd_b)));
  }
}

TEST_CASE("fit recovers a noiseless toy motion") {
  const Skeleton skel = Skeleton::chain(2);
  const MotionSequence truth = toy_motion(2, 8, 30.0, 103);
  std::vector<Vec3> roots(8, Vec3::Zero());
  const Observation obs =
      Observation::joints3d(fk_all(skel, roots, truth.poses()));

  FieldSet none;
  EnergyWeights w;
  w.pose_prior = w.vel_prior = w.acc_prior = 0.0;
  w.smooth = 0.0;  // pure data fit
  w.beta = 0.0;
  w.bone_length = 0.0;
  FitSchedule schedule;
  schedule.stage1_iters = 400;
  schedule.stage2_iters = 0;
  schedule.rollout_each_iter = false;
  schedule.step_pose = 0.05;
  schedule.optimize_beta = false;

  FitReport report;
  const MotionSequence fitted =
      fit_sequence(obs, skel, w, none, schedule, &truth, &report);
  const MetricsReport m = compute_metrics(fitted, truth, skel);
  CHECK(m.mpjpe_mm < 1.0);
  // Monotone energy within each stage.
  for (std::size_t i = 1; i < report.stage1_energy.size(); ++i) {
    CHECK(report.stage1_energy[i] <= report.stage1_energy[i - 1] + 1e-12);
  }
  // Poses remain valid rotations.
  for (const auto& s : fitted.states) {
    for (const auto& r : s.pose) CHECK(is_rotation(r, 1e-9));
  }
}

TEST_CASE("fit from identity initialization moves toward the data") {
  const Skeleton skel = Skeleton::chain(2);
  const MotionSequence truth = toy_motion(2, 5, 30.0, 107);
  std::vector<Vec3> roots(5, Vec3::Zero());
  const Observation obs =
      Observation::joints3d(fk_all(skel, roots, truth.poses()));

  FieldSet none;
  EnergyWeights w;
  w.pose_prior = w.vel_prior = w.acc_prior = 0.0;
  w.smooth = 0.1;
  FitSchedule schedule;
  schedule.stage1_iters = 150;
  schedule.stage2_iters = 0;
  schedule.rollout_each_iter = false;
  schedule.step_pose = 0.05;

  const MotionSequence fitted =
      fit_sequence(obs, skel, w, none, schedule);
  const MetricsReport fitted_m = compute_metrics(fitted, truth, skel);
  MotionSequence identity_init = truth;
  for (auto& s : identity_init.states) s.pose = identity_pose(2);
  const MetricsReport init_m = compute_metrics(identity_init, truth, skel);
  CHECK(fitted_m.mpjpe_mm < 0.25 * init_m.mpjpe_mm);
}

TEST_CASE("geodesic interpolation") {
  // Midpoint of I -> R_x(1.0) is R_x(0.5).
  std::vector<Pose> poses = {identity_pose(1), identity_pose(1),
                             {exp_so3(Vec3(1.0, 0, 0))}};
  const auto filled = geodesic_interpolate(poses, {true, false, true});
  CHECK(geodesic_distance(filled[1][0], exp_so3(Vec3(0.5, 0, 0))) < 1e-12);
  // Observed frames untouched.
  CHECK(pose_distance(filled[0], poses[0]) == doctest::Approx(0.0));
  CHECK(pose_distance(filled[2], poses[2]) == doctest::Approx(0.0));
  CHECK_THROWS_AS(geodesic_interpolate(poses, {false, false, true}),
                  std::invalid_argument);
}

TEST_CASE("generation is seeded and stochastic") {
  const Skeleton skel = Skeleton::chain(2);
  std::vector<Pose> corpus = {identity_pose(2)};
  const AnalyticCorpusPoseField pose_field(corpus);
  FieldSet fields{&pose_field, nullptr, nullptr};

  MotionState seed;
  seed.pose = identity_pose(2);
  seed.vel = zero_velocity(2);
  seed.acc = zero_velocity(2);

  EnergyWeights w;
  w.vel_prior = w.acc_prior = 0.0;
  FitSchedule schedule;
  schedule.stage1_iters = 10;
  schedule.stage2_iters = 5;
  schedule.rollout_each_iter = false;

  const MotionSequence a =
      generate_motion(seed, skel, fields, 8, 0.4, 1, w, schedule, 30.0);
  const MotionSequence b =
      generate_motion(seed, skel, fields, 8, 0.4, 1, w, schedule, 30.0);
  const MotionSequence c =
      generate_motion(seed, skel, fields, 8, 0.4, 2, w, schedule, 30.0);
  REQUIRE(a.num_frames() == 9);
  double same = 0.0, diff = 0.0;
  for (int t = 0; t < 9; ++t) {
    same += pose_distance(a.states[t].pose, b.states[t].pose);
    diff += pose_distance(a.states[t].pose, c.states[t].pose);
  }
  CHECK(same == doctest::Approx(0.0));
  CHECK(diff > 0.0);

  // Zero noise from an on-manifold rest state stays constant.
  const MotionSequence rest =
      generate_motion(seed, skel, fields, 6, 0.0, 3, w, schedule, 30.0);
  for (const auto& s : rest.states) {
    CHECK(pose_distance(s.pose, identity_pose(2)) < 1e-6);
  }
}

TEST_CASE("inbetween beats geodesic interpolation on acceleration error") {
  const Skeleton skel = Skeleton::chain(2);
  const MotionSequence truth = toy_motion(2, 24, 30.0, 109);
  std::vector<bool> observed(24, false);
  observed.front() = observed.back() = true;
  for (int t = 0; t < 24; t += 6) observed[t] = true;

  // Baseline: pure geodesic interpolation.
  const auto interp = geodesic_interpolate(truth.poses(), observed);
  std::vector<Vec3> roots(24, Vec3::Zero());
  const MotionSequence baseline = rebuild_states(interp, roots, 30.0);

  const AnalyticCorpusPoseField pose_field(truth.poses());
  FieldSet fields{&pose_field, nullptr, nullptr};
  EnergyWeights w;
  w.vel_prior = w.acc_prior = 0.0;
  FitSchedule schedule;
  schedule.stage1_iters = 60;
  schedule.stage2_iters = 40;
  schedule.rollout_each_iter = false;
  schedule.step_pose = 0.02;

  const MotionSequence ours =
      inbetween(truth, observed, skel, w, fields, schedule);
  const MetricsReport mb = compute_metrics(baseline, truth, skel);
  const MetricsReport mo = compute_metrics(ours, truth, skel);
  CHECK(mo.accel_error < mb.accel_error);
}
