#include "rmf/field.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "rmf/motion_io.hpp"

namespace rmf {

using nlohmann::json;

double DistanceField::pose_value_grad(const Pose& pose,
                                      PoseVelocity& g) const {
  if (kind() != FieldKind::kPose) {
    throw std::logic_error("pose_value_grad: not a pose field");
  }
  const Eigen::VectorXd enc = encode_pose(pose);
  const double value = eval(enc);
  const Eigen::VectorXd ambient = grad(enc);
  const int k = num_joints();
  g.assign(k, Vec3::Zero());
  for (int j = 0; j < k; ++j) {
    const Vec4 q = enc.segment<4>(4 * j);
    const Vec4 gq = ambient.segment<4>(4 * j);
    for (int i = 0; i < 3; ++i) {
      // d q / d omega_i at a right perturbation: 0.5 * q x (0, e_i).
      Vec4 e = Vec4::Zero();
      e[1 + i] = 1.0;
      g[j][i] = 0.5 * gq.dot(quat_multiply(q, e));
    }
  }
  return value;
}

int MlpField::expected_input_dim(FieldKind kind, int k) {
  switch (kind) {
    case FieldKind::kPose:
      return 4 * k;
    case FieldKind::kVelocity:
      return 3 * k + 4 * k;
    case FieldKind::kAcceleration:
      return 3 * k + 4 * k + 3 * k;
  }
  return 0;
}

MlpField::MlpField(Mlp net, FieldKind kind, int k)
    : net_(std::move(net)), kind_(kind), k_(k) {
  if (net_.input_dim() != expected_input_dim(kind, k)) {
    throw std::invalid_argument("MlpField: network input dim mismatch");
  }
}

int MlpField::main_dim() const {
  return kind_ == FieldKind::kPose ? 4 * k_ : 3 * k_;
}

int MlpField::conditioning_dim() const {
  return net_.input_dim() - main_dim();
}

double MlpField::eval(const Eigen::VectorXd& x) const {
  return net_.forward(x);
}

Eigen::VectorXd MlpField::grad(const Eigen::VectorXd& x) const {
  return net_.grad_input(x);
}

namespace {

double quat_angle(const Vec4& q) {
  return 2.0 * std::acos(std::clamp(std::abs(q[0]), 0.0, 1.0));
}

}  // namespace

double AnalyticIdentityField::eval(const Eigen::VectorXd& x) const {
  double d = 0.0;
  for (int j = 0; j < k_; ++j) d += quat_angle(x.segment<4>(4 * j));
  return d;
}

Eigen::VectorXd AnalyticIdentityField::grad(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (int j = 0; j < k_; ++j) {
    const double w = x[4 * j];
    const double s = std::sqrt(std::max(1.0 - w * w, 1e-16));
    g[4 * j] = -2.0 * (w >= 0.0 ? 1.0 : -1.0) / s;
  }
  return g;
}

double AnalyticIdentityField::pose_value_grad(const Pose& pose,
                                              PoseVelocity& g) const {
  check_same_k(pose.size(), static_cast<std::size_t>(k_));
  g.assign(k_, Vec3::Zero());
  double value = 0.0;
  for (int j = 0; j < k_; ++j) {
    const Vec3 w = log_so3(pose[j]);
    const double theta = w.norm();
    value += theta;
    if (theta > 1e-12) g[j] = w / theta;
  }
  return value;
}

AnalyticCorpusPoseField::AnalyticCorpusPoseField(std::vector<Pose> dataset)
    : dataset_(std::move(dataset)) {
  if (dataset_.empty()) {
    throw std::invalid_argument("AnalyticCorpusPoseField: empty corpus");
  }
  k_ = static_cast<int>(dataset_[0].size());
}

double AnalyticCorpusPoseField::eval(const Eigen::VectorXd& x) const {
  return nn_pose(decode_pose(x), dataset_).distance;
}

Eigen::VectorXd AnalyticCorpusPoseField::grad(const Eigen::VectorXd& x) const {
  const Pose pose = decode_pose(x);
  const NnResult nn = nn_pose(pose, dataset_);
  const Pose& target = dataset_[nn.index];
  // Per joint, d(R, R') = 2 acos(|<q, q'>|); the ambient gradient w.r.t. q
  // follows in closed form with the neighbor held fixed.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (int j = 0; j < k_; ++j) {
    const Vec4 q = x.segment<4>(4 * j);
    const Vec4 qt = quat_encode(target[j]);
    const double dot = q.dot(qt);
    const double c = std::abs(dot);
    if (c > 1.0 - 1e-12) continue;  // coincident joints contribute no slope
    const double sign = dot >= 0.0 ? 1.0 : -1.0;
    g.segment<4>(4 * j) = -2.0 * sign / std::sqrt(1.0 - c * c) * qt;
  }
  return g;
}

AnalyticSetField::AnalyticSetField(std::vector<Eigen::VectorXd> dataset,
                                   FieldKind kind, int k)
    : dataset_(std::move(dataset)), kind_(kind), k_(k) {
  if (dataset_.empty()) {
    throw std::invalid_argument("AnalyticSetField: empty dataset");
  }
  if (kind_ == FieldKind::kPose) {
    throw std::invalid_argument("AnalyticSetField: linear spaces only");
  }
  for (const auto& d : dataset_) {
    if (d.size() != 3 * k_) {
      throw std::invalid_argument("AnalyticSetField: element dim mismatch");
    }
  }
}

int AnalyticSetField::conditioning_dim() const {
  return kind_ == FieldKind::kVelocity ? 4 * k_ : 4 * k_ + 3 * k_;
}

double AnalyticSetField::eval(const Eigen::VectorXd& x) const {
  return nn_vec(x.head(main_dim()), dataset_).distance;
}

Eigen::VectorXd AnalyticSetField::grad(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd main = x.head(main_dim());
  const NnResult nn = nn_vec(main, dataset_);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  const Eigen::VectorXd diff = main - dataset_[nn.index];
  const double n = diff.norm();
  if (n > 1e-12) g.head(main_dim()) = diff / n;
  return g;
}

PoseTangent field_rgrad_pose(const DistanceField& field, const Pose& pose) {
  PoseVelocity g;
  field.pose_value_grad(pose, g);
  // Euclidean gradients R hat(g)/2 reproduce g under the Frobenius metric;
  // they are already tangent so pose_rgrad leaves them unchanged.
  std::vector<Mat3> egrads(pose.size());
  for (std::size_t j = 0; j < pose.size(); ++j) {
    egrads[j] = pose[j] * (0.5 * hat(g[j]));
  }
  return pose_rgrad(pose, egrads);
}

namespace {

std::string kind_tag(FieldKind kind) {
  switch (kind) {
    case FieldKind::kPose:
      return "pose";
    case FieldKind::kVelocity:
      return "velocity";
    case FieldKind::kAcceleration:
      return "acceleration";
  }
  return "pose";
}

FieldKind kind_from_tag(const std::string& tag) {
  if (tag == "pose") return FieldKind::kPose;
  if (tag == "velocity") return FieldKind::kVelocity;
  if (tag == "acceleration") return FieldKind::kAcceleration;
  throw std::runtime_error("model file: unknown field kind " + tag);
}

}  // namespace

std::string field_to_json(const MlpField& field) {
  json j;
  j["version"] = 1;
  j["kind"] = kind_tag(field.kind());
  j["k"] = field.num_joints();
  j["widths"] = field.net().widths();
  j["hidden_activation"] = "softplus";
  j["output_activation"] = "softplus";
  json layers = json::array();
  for (std::size_t l = 0; l < field.net().weights().size(); ++l) {
    const Eigen::MatrixXd& w = field.net().weights()[l];
    std::vector<double> flat;
    flat.reserve(w.size());
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    json layer;
    layer["weights"] = flat;
    const Eigen::VectorXd& b = field.net().biases()[l];
    layer["biases"] = std::vector<double>(b.data(), b.data() + b.size());
    layers.push_back(layer);
  }
  j["layers"] = layers;
  return j.dump() + "\n";
}

MlpField field_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("model file: unsupported version");
  }
  if (j.at("hidden_activation") != "softplus" ||
      j.at("output_activation") != "softplus") {
    throw std::runtime_error("model file: unsupported activation");
  }
  const auto widths = j.at("widths").get<std::vector<int>>();
  std::mt19937_64 rng(0);
  Mlp net = Mlp::create(widths, rng);
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const json& layer = j.at("layers").at(l);
    const auto flat = layer.at("weights").get<std::vector<double>>();
    const int rows = widths[l + 1], cols = widths[l];
    if (static_cast<int>(flat.size()) != rows * cols) {
      throw std::runtime_error("model file: weight size mismatch");
    }
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = flat[r * cols + c];
    }
    weights.push_back(std::move(w));
    const auto bias = layer.at("biases").get<std::vector<double>>();
    biases.push_back(
        Eigen::Map<const Eigen::VectorXd>(bias.data(), bias.size()));
  }
  net.set_parameters(std::move(weights), std::move(biases));
  return MlpField(std::move(net), kind_from_tag(j.at("kind")),
                  j.at("k").get<int>());
}

void write_field_file(const std::string& path, const MlpField& field) {
  write_text_file(path, field_to_json(field));
}

MlpField read_field_file(const std::string& path) {
  return field_from_json(read_text_file(path));
}

}  // namespace rmf
