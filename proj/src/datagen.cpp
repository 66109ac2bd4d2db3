#include "rmf/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace rmf {

using nlohmann::json;

void SynthMotionSpec::validate() const {
  const std::size_t k = axes.size();
  if (k == 0 || amplitudes.size() != k || frequencies.size() != k ||
      phases.size() != k || limits.size() != k) {
    throw std::invalid_argument("synth spec: inconsistent per-joint arrays");
  }
  if (!(fps > 0.0) || frames < 5) {
    throw std::invalid_argument("synth spec: need fps > 0 and >= 5 frames");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (std::abs(axes[i].norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("synth spec: axes must be unit vectors");
    }
    if (amplitudes[i] > limits[i]) {
      throw std::invalid_argument("synth spec: amplitude exceeds joint limit");
    }
    if (frequencies[i] >= fps / 4.0) {
      throw std::invalid_argument("synth spec: frequency above Nyquist margin");
    }
  }
}

SynthMotionSpec SynthMotionSpec::toy(int k, std::uint64_t seed) {
  SynthMotionSpec s;
  const Vec3 base_axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (int i = 0; i < k; ++i) {
    Vec3 axis = base_axes[i % 3];
    if (i >= 3) axis = (axis + 0.5 * base_axes[(i + 1) % 3]).normalized();
    s.axes.push_back(axis);
    s.amplitudes.push_back(0.5 + 0.1 * (i % 3));
    s.frequencies.push_back(0.3 + 0.15 * i);
    s.phases.push_back(0.0);
    s.limits.push_back(1.5);
  }
  s.frames = 120;
  s.fps = 30.0;
  s.seed = seed;
  s.amplitude_jitter = 0.25;
  s.frequency_jitter = 0.25;
  return s;
}

CorpusSplit synth_corpus(const SynthMotionSpec& spec, int n_sequences) {
  spec.validate();
  if (n_sequences < 1) {
    throw std::invalid_argument("synth_corpus: need at least one sequence");
  }
  const int k = static_cast<int>(spec.axes.size());
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);

  const int n_held = n_sequences >= 2 ? std::max(1, n_sequences / 10) : 0;
  CorpusSplit out;
  for (MotionCorpus* c : {&out.train, &out.heldout}) {
    c->k = k;
    c->fps = spec.fps;
    c->seed = spec.seed;
  }

  for (int s = 0; s < n_sequences; ++s) {
    std::vector<double> amp(k), freq(k), phase(k);
    double shared_amp = 0.0, shared_freq = 0.0, shared_phase = 0.0;
    if (spec.coupled_joints) {
      shared_amp = unit(rng);
      shared_freq = unit(rng);
      shared_phase = phase_dist(rng);
    }
    for (int j = 0; j < k; ++j) {
      const double ua = spec.coupled_joints ? shared_amp : unit(rng);
      const double uf = spec.coupled_joints ? shared_freq : unit(rng);
      const double up = spec.coupled_joints ? shared_phase : phase_dist(rng);
      amp[j] = std::clamp(spec.amplitudes[j] * (1.0 + spec.amplitude_jitter * ua),
                          0.0, spec.limits[j]);
      freq[j] = std::min(spec.frequencies[j] * (1.0 + spec.frequency_jitter * uf),
                         spec.fps / 4.0 - 1e-9);
      phase[j] = spec.phases[j] + up;
    }
    std::vector<Pose> poses(spec.frames, identity_pose(k));
    for (int t = 0; t < spec.frames; ++t) {
      const double time = t / spec.fps;
      for (int j = 0; j < k; ++j) {
        const double angle =
            amp[j] * std::sin(2.0 * M_PI * freq[j] * time + phase[j]);
        poses[t][j] = exp_so3(angle * spec.axes[j]);
      }
    }
    const auto vels =
        estimate_velocity(poses, spec.fps, VelocityScheme::kLogCentral);
    const auto accs =
        estimate_acceleration(vels, spec.fps, AccelScheme::kCentral);

    // Keep the middle 80% of frames.
    const int skip = spec.frames / 10;
    MotionCorpus& dst = (s >= n_sequences - n_held) ? out.heldout : out.train;
    for (int t = skip; t < spec.frames - skip; ++t) {
      dst.poses.push_back(poses[t]);
      dst.vels.push_back(vels[t]);
      dst.accs.push_back(accs[t]);
    }
  }
  return out;
}

NnResult nn_pose(const Pose& query, const std::vector<Pose>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("nn_pose: empty dataset");
  NnResult best{std::numeric_limits<double>::infinity(), -1};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double d = pose_distance(query, dataset[i]);
    if (d < best.distance) best = {d, static_cast<int>(i)};
  }
  return best;
}

NnResult nn_vec(const Eigen::VectorXd& query,
                const std::vector<Eigen::VectorXd>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("nn_vec: empty dataset");
  NnResult best{std::numeric_limits<double>::infinity(), -1};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double d = (query - dataset[i]).norm();
    if (d < best.distance) best = {d, static_cast<int>(i)};
  }
  return best;
}

PoseIndex::PoseIndex(const std::vector<Pose>& dataset, int shortlist)
    : dataset_(&dataset), shortlist_(shortlist) {
  if (dataset.empty()) throw std::invalid_argument("PoseIndex: empty dataset");
  encodings_.resize(dataset.size(), 4 * dataset[0].size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    encodings_.row(i) = encode_pose(dataset[i]).transpose();
  }
}

NnResult PoseIndex::query(const Pose& q) const {
  const Eigen::VectorXd enc = encode_pose(q);
  const Eigen::VectorXd d2 =
      (encodings_.rowwise() - enc.transpose()).rowwise().squaredNorm();
  const int n = static_cast<int>(d2.size());
  const int m = std::min(shortlist_, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + m, order.end(),
                    [&](int a, int b) { return d2[a] < d2[b]; });
  NnResult best{std::numeric_limits<double>::infinity(), -1};
  for (int i = 0; i < m; ++i) {
    const double d = pose_distance(q, (*dataset_)[order[i]]);
    if (d < best.distance) best = {d, order[i]};
  }
  return best;
}

namespace {

std::vector<Eigen::VectorXd> flatten_all(
    const std::vector<std::vector<Vec3>>& data) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.size());
  for (const auto& v : data) out.push_back(encode_vecs(v));
  return out;
}

double component_std(const std::vector<Eigen::VectorXd>& data) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& v : data) {
    sum += v.sum();
    sq += v.squaredNorm();
    n += v.size();
  }
  const double mean = sum / n;
  return std::sqrt(std::max(sq / n - mean * mean, 1e-12));
}

}  // namespace

LabeledSet sample_negatives(const MotionCorpus& corpus, int n,
                            const NegativeRatios& ratios, double sigma,
                            FieldKind kind, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_negatives: n must be >= 1");
  if (ratios.perturb < 0.0 || ratios.swap < 0.0 || ratios.random < 0.0 ||
      std::abs(ratios.perturb + ratios.swap + ratios.random - 1.0) > 1e-9) {
    throw std::invalid_argument("sample_negatives: ratios must sum to 1");
  }
  if (corpus.size() == 0) {
    throw std::invalid_argument("sample_negatives: empty corpus");
  }

  const int n_perturb = static_cast<int>(std::lround(n * ratios.perturb));
  const int n_swap = static_cast<int>(std::lround(n * ratios.swap));
  const int n_random = n - n_perturb - n_swap;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, corpus.size() - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int k = corpus.k;
  LabeledSet set;
  set.kind = kind;
  set.k = k;
  set.samples.reserve(n);

  std::vector<Eigen::VectorXd> flat_ds;
  std::vector<Eigen::VectorXd> flat_vels;
  double random_scale = 0.0;
  if (kind != FieldKind::kPose) {
    flat_ds = flatten_all(kind == FieldKind::kVelocity ? corpus.vels
                                                       : corpus.accs);
    random_scale = 3.0 * component_std(flat_ds);
    if (kind == FieldKind::kAcceleration) flat_vels = flatten_all(corpus.vels);
  }

  // Conditional fields predict the distance to the nearest corpus *state*
  // under the L1 product metric, so a corpus velocity paired with the wrong
  // pose is still off-manifold. Without the pose term every swap sample
  // would carry a zero label and the conditioning input would be vacuous.
  const auto state_distance = [&](const Eigen::VectorXd& main, int cond) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < flat_ds.size(); ++i) {
      double d = pose_distance(corpus.poses[cond], corpus.poses[i]) +
                 (main - flat_ds[i]).norm();
      if (kind == FieldKind::kAcceleration) {
        d += (flat_vels[cond] - flat_vels[i]).norm();
      }
      if (d < best) best = d;
    }
    return best;
  };

  for (int i = 0; i < n; ++i) {
    const int category = i < n_perturb ? 0 : (i < n_perturb + n_swap ? 1 : 2);
    const int base = pick(rng);
    LabeledSample sample;
    sample.category = category;

    if (kind == FieldKind::kPose) {
      Pose p;
      if (category == 0) {
        p = corpus.poses[base];
        for (auto& r : p) {
          r = r * exp_so3(random_axial_half_gaussian(rng, sigma));
        }
      } else if (category == 1) {
        p = corpus.poses[base];
      } else {
        p = random_pose(rng, k);
      }
      sample.input = encode_pose(p);
      sample.distance = nn_pose(p, corpus.poses).distance;
    } else {
      const bool is_vel = kind == FieldKind::kVelocity;
      std::vector<Vec3> v = is_vel ? corpus.vels[base] : corpus.accs[base];
      if (category == 0) {
        for (auto& w : v) w += random_axial_half_gaussian(rng, sigma);
      } else if (category == 1) {
        const int other = pick(rng);
        v = is_vel ? corpus.vels[other] : corpus.accs[other];
      } else {
        for (auto& w : v) {
          w = random_scale * Vec3(gauss(rng), gauss(rng), gauss(rng));
        }
      }
      const Eigen::VectorXd flat = encode_vecs(v);
      sample.distance = state_distance(flat, base);
      // Conditioning blocks are appended after the main input.
      if (is_vel) {
        sample.input.resize(3 * k + 4 * k);
        sample.input << flat, encode_pose(corpus.poses[base]);
      } else {
        sample.input.resize(3 * k + 4 * k + 3 * k);
        sample.input << flat, encode_pose(corpus.poses[base]),
            encode_vecs(corpus.vels[base]);
      }
    }
    set.samples.push_back(std::move(sample));
  }
  return set;
}

std::string labels_to_json(const LabeledSet& set) {
  json j;
  j["kind"] = set.kind == FieldKind::kPose
                  ? "pose"
                  : (set.kind == FieldKind::kVelocity ? "velocity"
                                                      : "acceleration");
  j["k"] = set.k;
  json samples = json::array();
  for (const auto& s : set.samples) {
    json e;
    e["encoding"] = std::vector<double>(s.input.data(),
                                        s.input.data() + s.input.size());
    e["distance"] = s.distance;
    e["category"] = s.category;
    samples.push_back(e);
  }
  j["samples"] = samples;
  return j.dump() + "\n";
}

LabeledSet labels_from_json(const std::string& text) {
  const json j = json::parse(text);
  LabeledSet set;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pose") {
    set.kind = FieldKind::kPose;
  } else if (kind == "velocity") {
    set.kind = FieldKind::kVelocity;
  } else if (kind == "acceleration") {
    set.kind = FieldKind::kAcceleration;
  } else {
    throw std::runtime_error("labels file: unknown kind " + kind);
  }
  set.k = j.at("k").get<int>();
  for (const auto& e : j.at("samples")) {
    LabeledSample s;
    const auto vals = e.at("encoding").get<std::vector<double>>();
    s.input = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    s.distance = e.at("distance").get<double>();
    s.category = e.at("category").get<int>();
    set.samples.push_back(std::move(s));
  }
  return set;
}

}  // namespace rmf
