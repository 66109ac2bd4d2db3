#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmf/datagen.hpp"
#include "rmf/metrics.hpp"
#include "rmf/motion_io.hpp"
#include "rmf/observation.hpp"
#include "rmf/optimize.hpp"
#include "rmf/train.hpp"

namespace {

using nlohmann::json;

int log_level() {
  const char* env = std::getenv("RMF_LOG");
  if (env == nullptr) return 1;  // warn
  const std::string s(env);
  if (s == "error") return 0;
  if (s == "warn") return 1;
  if (s == "info") return 2;
  if (s == "debug") return 3;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[info] " << msg << "\n";
}

json fail(const std::string& what) {
  json j;
  j["error"] = what;
  return j;
}

// Command configs are JSON objects with a "version" field; unknown keys are
// rejected so typos fail loudly.
json load_config(const std::string& path,
                 const std::set<std::string>& allowed) {
  json cfg = json::object();
  if (!path.empty()) {
    cfg = json::parse(rmf::read_text_file(path));
    if (!cfg.is_object()) throw std::runtime_error("config: not an object");
    if (!cfg.contains("version") || cfg["version"].get<int>() != 1) {
      throw std::runtime_error("config: missing or unsupported version");
    }
    for (const auto& [key, value] : cfg.items()) {
      if (key != "version" && allowed.count(key) == 0) {
        throw std::runtime_error("config: unknown key '" + key + "'");
      }
    }
  }
  return cfg;
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (cfg.contains(key)) return cfg[key].get<T>();
  return fallback;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

rmf::FieldSet load_fields(const std::string& dir,
                          std::vector<std::unique_ptr<rmf::MlpField>>& owned) {
  rmf::FieldSet fields;
  const auto try_load = [&](const std::string& name) -> rmf::MlpField* {
    const auto p = std::filesystem::path(dir) / name;
    if (!std::filesystem::exists(p)) return nullptr;
    owned.push_back(
        std::make_unique<rmf::MlpField>(rmf::read_field_file(p.string())));
    return owned.back().get();
  };
  fields.pose = try_load("field_pose.json");
  fields.velocity = try_load("field_velocity.json");
  fields.acceleration = try_load("field_acceleration.json");
  return fields;
}

rmf::EnergyWeights weights_from_config(const json& cfg) {
  rmf::EnergyWeights w;
  w.data = get_or(cfg, "w_data", w.data);
  w.beta = get_or(cfg, "w_beta", w.beta);
  w.pose_prior = get_or(cfg, "w_pose_prior", w.pose_prior);
  w.smooth = get_or(cfg, "w_smooth", w.smooth);
  w.bone_length = get_or(cfg, "w_bone_length", w.bone_length);
  w.vel_prior = get_or(cfg, "w_vel_prior", w.vel_prior);
  w.acc_prior = get_or(cfg, "w_acc_prior", w.acc_prior);
  w.contact_joint = get_or(cfg, "w_contact_joint", w.contact_joint);
  w.contact_vel = get_or(cfg, "w_contact_vel", w.contact_vel);
  w.contact_height = get_or(cfg, "w_contact_height", w.contact_height);
  return w;
}

const std::set<std::string> kFitKeys = {
    "w_data",        "w_beta",       "w_pose_prior",   "w_smooth",
    "w_bone_length", "w_vel_prior",  "w_acc_prior",    "w_contact_joint",
    "w_contact_vel", "w_contact_height", "stage1_iters", "stage2_iters",
    "step_pose",     "step_root",    "step_beta",      "rollout_each_iter",
    "proj_eps",      "proj_max_iters"};

rmf::FitSchedule schedule_from_config(const json& cfg, double fps) {
  rmf::FitSchedule s;
  s.stage1_iters = get_or(cfg, "stage1_iters", s.stage1_iters);
  s.stage2_iters = get_or(cfg, "stage2_iters", s.stage2_iters);
  s.step_pose = get_or(cfg, "step_pose", s.step_pose);
  s.step_root = get_or(cfg, "step_root", s.step_root);
  s.step_beta = get_or(cfg, "step_beta", s.step_beta);
  s.rollout_each_iter = get_or(cfg, "rollout_each_iter", s.rollout_each_iter);
  s.rollout.lambda = 1.0 / fps;
  s.rollout.alpha = 1.0 / fps;
  s.rollout.pose_proj.eps = get_or(cfg, "proj_eps", s.rollout.pose_proj.eps);
  s.rollout.velocity_proj.eps = s.rollout.pose_proj.eps;
  s.rollout.pose_proj.max_iters =
      get_or(cfg, "proj_max_iters", s.rollout.pose_proj.max_iters);
  s.rollout.velocity_proj.max_iters = s.rollout.pose_proj.max_iters;
  return s;
}

int cmd_gen_data(const std::string& config, std::uint64_t seed,
                 const std::string& out) {
  const json cfg = load_config(
      config, {"k", "sequences", "samples", "sigma", "frames", "fps"});
  const int k = get_or(cfg, "k", 2);
  const int sequences = get_or(cfg, "sequences", 40);
  const int samples = get_or(cfg, "samples", 5000);
  const double sigma = get_or(cfg, "sigma", 0.25);

  rmf::SynthMotionSpec spec = rmf::SynthMotionSpec::toy(k, seed);
  spec.frames = get_or(cfg, "frames", spec.frames);
  spec.fps = get_or(cfg, "fps", spec.fps);
  const rmf::CorpusSplit split = rmf::synth_corpus(spec, sequences);
  log_info("corpus: " + std::to_string(split.train.size()) + " train / " +
           std::to_string(split.heldout.size()) + " held-out frames");

  const rmf::NegativeRatios ratios;
  const auto emit = [&](rmf::FieldKind kind, const std::string& tag) {
    const int held = std::max(samples / 10, 1);
    const auto tr =
        rmf::sample_negatives(split.train, samples, ratios, sigma, kind, seed);
    const auto ho = rmf::sample_negatives(split.heldout, held, ratios, sigma,
                                          kind, seed + 1);
    rmf::write_text_file(out_path(out, "labels_" + tag + "_train.json"),
                         rmf::labels_to_json(tr));
    rmf::write_text_file(out_path(out, "labels_" + tag + "_heldout.json"),
                         rmf::labels_to_json(ho));
  };
  emit(rmf::FieldKind::kPose, "pose");
  emit(rmf::FieldKind::kVelocity, "velocity");
  emit(rmf::FieldKind::kAcceleration, "acceleration");

  // A clean contiguous clip of the held-out corpus for downstream protocols.
  const int frames = std::min(split.heldout.size(), 96);
  std::vector<rmf::Pose> poses(split.heldout.poses.begin(),
                               split.heldout.poses.begin() + frames);
  std::vector<rmf::Vec3> roots(frames, rmf::Vec3::Zero());
  rmf::MotionFile ref;
  ref.seq = rmf::rebuild_states(poses, roots, spec.fps);
  ref.skel = rmf::Skeleton::chain(k);
  rmf::write_motion_file(out_path(out, "reference_motion.json"), ref);
  return 0;
}

int cmd_train(const std::string& config, std::uint64_t seed,
              const std::string& out, const std::string& input,
              const std::string& heldout_path) {
  const json cfg = load_config(
      config, {"hidden", "learning_rate", "lr_decay", "momentum", "epochs",
               "batch_size", "first_layer_gain"});
  rmf::TrainConfig tc;
  tc.hidden = get_or(cfg, "hidden", tc.hidden);
  tc.learning_rate = get_or(cfg, "learning_rate", tc.learning_rate);
  tc.lr_decay = get_or(cfg, "lr_decay", tc.lr_decay);
  tc.first_layer_gain = get_or(cfg, "first_layer_gain", tc.first_layer_gain);
  tc.momentum = get_or(cfg, "momentum", tc.momentum);
  tc.epochs = get_or(cfg, "epochs", tc.epochs);
  tc.batch_size = get_or(cfg, "batch_size", tc.batch_size);
  tc.seed = seed;

  const rmf::LabeledSet train =
      rmf::labels_from_json(rmf::read_text_file(input));
  std::optional<rmf::LabeledSet> heldout;
  if (!heldout_path.empty()) {
    heldout = rmf::labels_from_json(rmf::read_text_file(heldout_path));
  }
  rmf::TrainReport report;
  const rmf::MlpField field = rmf::train_field(
      train, heldout ? &*heldout : nullptr, tc, &report);

  const std::string tag = train.kind == rmf::FieldKind::kPose ? "pose"
                          : train.kind == rmf::FieldKind::kVelocity
                              ? "velocity"
                              : "acceleration";
  rmf::write_field_file(out_path(out, "field_" + tag + ".json"), field);
  rmf::write_text_file(out_path(out, "train_report_" + tag + ".json"),
                       rmf::train_report_to_json(report));
  log_info("held-out pearson: " + std::to_string(report.heldout_pearson));
  return 0;
}

int cmd_project(const std::string& config, const std::string& out,
                const std::string& input, const std::string& fields_dir) {
  const json cfg = load_config(config, {"proj_eps", "proj_max_iters"});
  std::vector<std::unique_ptr<rmf::MlpField>> owned;
  const rmf::FieldSet fields = load_fields(fields_dir, owned);

  rmf::MotionFile m = rmf::read_motion_file(input);
  rmf::StageConfigs sc;
  sc.pose.eps = get_or(cfg, "proj_eps", sc.pose.eps);
  sc.velocity.eps = sc.acceleration.eps = sc.pose.eps;
  sc.pose.max_iters = get_or(cfg, "proj_max_iters", sc.pose.max_iters);
  sc.velocity.max_iters = sc.acceleration.max_iters = sc.pose.max_iters;

  json traces = json::array();
  for (auto& state : m.seq.states) {
    std::vector<rmf::ProjectionTrace> ts;
    state = rmf::project_state(state, fields, sc, &ts);
    json per_frame = json::array();
    for (const auto& t : ts) per_frame.push_back(json::parse(trace_to_json(t)));
    traces.push_back(per_frame);
  }
  rmf::write_motion_file(out_path(out, "projected_motion.json"), m);
  rmf::write_text_file(out_path(out, "projection_trace.json"),
                       traces.dump(2) + "\n");
  return 0;
}

int cmd_rollout(const std::string& config, const std::string& out,
                const std::string& input, const std::string& fields_dir) {
  const json cfg =
      load_config(config, {"proj_eps", "proj_max_iters", "enabled"});
  std::vector<std::unique_ptr<rmf::MlpField>> owned;
  const rmf::FieldSet fields = load_fields(fields_dir, owned);

  const rmf::MotionFile m = rmf::read_motion_file(input);
  if (m.seq.num_frames() < 2) {
    throw std::runtime_error("rollout: need at least 2 frames");
  }
  std::vector<rmf::PoseAcceleration> accs;
  for (int t = 0; t + 1 < m.seq.num_frames(); ++t) {
    accs.push_back(m.seq.states[t].acc);
  }
  rmf::IntegratorConfig ic;
  ic.lambda = 1.0 / m.seq.fps;
  ic.alpha = 1.0 / m.seq.fps;
  ic.pose_proj.eps = get_or(cfg, "proj_eps", ic.pose_proj.eps);
  ic.velocity_proj.eps = ic.pose_proj.eps;
  ic.pose_proj.max_iters = get_or(cfg, "proj_max_iters", ic.pose_proj.max_iters);
  ic.velocity_proj.max_iters = ic.pose_proj.max_iters;
  ic.pose_proj.enabled = get_or(cfg, "enabled", true);
  ic.velocity_proj.enabled = ic.pose_proj.enabled;

  rmf::MotionFile result;
  result.seq = rmf::integrate(m.seq.states[0].pose, m.seq.states[0].vel, accs,
                              fields, ic, m.seq.fps);
  result.skel = m.skel;
  rmf::write_motion_file(out_path(out, "rollout_motion.json"), result);
  return 0;
}

int run_fit(const rmf::Observation& obs, const rmf::Skeleton& skel,
            const json& cfg, double fps, const rmf::FieldSet& fields,
            const rmf::MotionSequence* init, const std::string& out,
            const rmf::MotionSequence* reference) {
  const rmf::EnergyWeights w = weights_from_config(cfg);
  const rmf::FitSchedule schedule = schedule_from_config(cfg, fps);
  rmf::FitReport report;
  const rmf::MotionSequence fitted =
      rmf::fit_sequence(obs, skel, w, fields, schedule, init, &report);

  rmf::MotionFile result;
  result.seq = fitted;
  result.skel = skel;
  rmf::write_motion_file(out_path(out, "fitted_motion.json"), result);
  rmf::write_text_file(out_path(out, "fit_report.json"),
                       rmf::fit_report_to_json(report));
  if (reference != nullptr) {
    const rmf::MetricsReport m = rmf::compute_metrics(fitted, *reference, skel);
    rmf::write_text_file(out_path(out, "metrics.json"),
                         rmf::metrics_to_json(m));
    log_info("mpjpe_mm: " + std::to_string(m.mpjpe_mm));
  }
  return 0;
}

int cmd_denoise(const std::string& config, const std::string& out,
                const std::string& input, const std::string& fields_dir,
                const std::string& reference_path) {
  const json cfg = load_config(config, kFitKeys);
  std::vector<std::unique_ptr<rmf::MlpField>> owned;
  const rmf::FieldSet fields = load_fields(fields_dir, owned);

  const rmf::MotionFile noisy = rmf::read_motion_file(input);
  std::vector<std::vector<rmf::Vec3>> positions;
  for (const auto& s : noisy.seq.states) {
    positions.push_back(rmf::forward_kinematics(noisy.skel, s.t_r, s.pose));
  }
  const rmf::Observation obs = rmf::Observation::joints3d(std::move(positions));

  std::optional<rmf::MotionFile> reference;
  if (!reference_path.empty()) {
    reference = rmf::read_motion_file(reference_path);
  }
  return run_fit(obs, noisy.skel, cfg, noisy.seq.fps, fields, &noisy.seq, out,
                 reference ? &reference->seq : nullptr);
}

int cmd_fit(const std::string& config, const std::string& out,
            const std::string& input, const std::string& fields_dir,
            const std::string& skeleton_path,
            const std::string& reference_path) {
  const json cfg = load_config(config, kFitKeys);
  std::vector<std::unique_ptr<rmf::MlpField>> owned;
  const rmf::FieldSet fields = load_fields(fields_dir, owned);

  const rmf::Observation obs =
      rmf::read_observation_file(input);
  const rmf::MotionFile skel_file = rmf::read_motion_file(skeleton_path);

  std::optional<rmf::MotionFile> reference;
  if (!reference_path.empty()) {
    reference = rmf::read_motion_file(reference_path);
  }
  return run_fit(obs, skel_file.skel, cfg, skel_file.seq.fps, fields, nullptr,
                 out, reference ? &reference->seq : nullptr);
}

int cmd_inbetween(const std::string& config, const std::string& out,
                  const std::string& input, const std::string& fields_dir) {
  std::set<std::string> keys = kFitKeys;
  keys.insert("observed_stride");
  const json cfg = load_config(config, keys);
  std::vector<std::unique_ptr<rmf::MlpField>> owned;
  const rmf::FieldSet fields = load_fields(fields_dir, owned);

  const rmf::MotionFile key_file = rmf::read_motion_file(input);
  const int t_max = key_file.seq.num_frames();
  const int stride = get_or(cfg, "observed_stride", 0);
  std::vector<bool> observed(t_max, false);
  if (stride > 0) {
    for (int t = 0; t < t_max; t += stride) observed[t] = true;
  }
  observed.front() = observed.back() = true;

  const rmf::EnergyWeights w = weights_from_config(cfg);
  const rmf::FitSchedule schedule =
      schedule_from_config(cfg, key_file.seq.fps);
  rmf::FitReport report;
  const rmf::MotionSequence fitted = rmf::inbetween(
      key_file.seq, observed, key_file.skel, w, fields, schedule, &report);

  rmf::MotionFile result;
  result.seq = fitted;
  result.skel = key_file.skel;
  rmf::write_motion_file(out_path(out, "inbetween_motion.json"), result);
  rmf::write_text_file(out_path(out, "fit_report.json"),
                       rmf::fit_report_to_json(report));
  const rmf::MetricsReport m =
      rmf::compute_metrics(fitted, key_file.seq, key_file.skel);
  rmf::write_text_file(out_path(out, "metrics.json"), rmf::metrics_to_json(m));
  return 0;
}

int cmd_metrics(const std::string& out, const std::string& input,
                const std::string& reference_path) {
  const rmf::MotionFile pred = rmf::read_motion_file(input);
  const rmf::MotionFile ref = rmf::read_motion_file(reference_path);
  const rmf::MetricsReport m =
      rmf::compute_metrics(pred.seq, ref.seq, pred.skel);
  rmf::write_text_file(out_path(out, "metrics.json"), rmf::metrics_to_json(m));
  std::cout << rmf::metrics_to_json(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian motion-field toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // let global options appear after the subcommand

  std::string config, out = ".", input, fields_dir, skeleton, heldout,
              reference;
  std::uint64_t seed = 1;
  app.add_option("--config", config, "JSON config file");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out, "Output directory");

  auto* gen = app.add_subcommand("gen-data", "Synthesize corpus and labels");
  auto* train = app.add_subcommand("train", "Train a distance field");
  train->add_option("--input", input, "Training labels")->required();
  train->add_option("--heldout", heldout, "Held-out labels");
  auto* project = app.add_subcommand("project", "Project a motion onto the fields");
  auto* rollout = app.add_subcommand("rollout", "Projected Euler rollout");
  auto* denoise = app.add_subcommand("denoise", "Denoise a motion");
  denoise->add_option("--reference", reference, "Clean reference motion");
  auto* fit = app.add_subcommand("fit", "Fit a motion to observations");
  fit->add_option("--skeleton", skeleton, "Skeleton (motion file)")->required();
  fit->add_option("--reference", reference, "Reference motion for metrics");
  auto* inbet = app.add_subcommand("inbetween", "Keyframe in-betweening");
  auto* metrics = app.add_subcommand("metrics", "Compare two motions");
  metrics->add_option("--reference", reference, "Reference motion")->required();

  for (auto* cmd : {project, rollout, denoise, fit, inbet}) {
    cmd->add_option("--fields", fields_dir, "Directory of field model files");
  }
  for (auto* cmd : {project, rollout, denoise, fit, inbet, metrics}) {
    cmd->add_option("--input", input, "Input file")->required();
  }

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_gen_data(config, seed, out);
    if (train->parsed()) return cmd_train(config, seed, out, input, heldout);
    if (project->parsed()) return cmd_project(config, out, input, fields_dir);
    if (rollout->parsed()) return cmd_rollout(config, out, input, fields_dir);
    if (denoise->parsed()) {
      return cmd_denoise(config, out, input, fields_dir, reference);
    }
    if (fit->parsed()) {
      return cmd_fit(config, out, input, fields_dir, skeleton, reference);
    }
    if (inbet->parsed()) return cmd_inbetween(config, out, input, fields_dir);
    if (metrics->parsed()) return cmd_metrics(out, input, reference);
  } catch (const std::exception& e) {
    std::cerr << fail(e.what()).dump() << "\n";
    return 1;
  }
  return 2;
}
