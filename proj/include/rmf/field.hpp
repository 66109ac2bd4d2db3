#pragma once

#include <memory>
#include <string>

#include "rmf/datagen.hpp"
#include "rmf/mlp.hpp"
#include "rmf/pose.hpp"

namespace rmf {

// Unsigned distance-to-manifold field over a flat encoding. The input vector
// is the main block (4K quats for poses, 3K reals for velocities or
// accelerations) followed by the conditioning blocks:
//   velocity field:      [vel(3K) | pose(4K)]
//   acceleration field:  [acc(3K) | pose(4K) | vel(3K)]
class DistanceField {
 public:
  virtual ~DistanceField() = default;

  virtual FieldKind kind() const = 0;
  virtual int num_joints() const = 0;
  virtual int main_dim() const = 0;
  virtual int conditioning_dim() const = 0;
  int input_dim() const { return main_dim() + conditioning_dim(); }

  virtual double eval(const Eigen::VectorXd& x) const = 0;
  /// Ambient gradient of eval over the full input.
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& x) const = 0;

  /// Pose fields only: value and tangent-coordinate gradient, where g[k][i]
  /// is d/de eval at R_k Exp(e hat(e_i)). Default chain-rules the ambient
  /// quaternion gradient through the right-perturbation Jacobian.
  virtual double pose_value_grad(const Pose& pose, PoseVelocity& g) const;
};

class MlpField : public DistanceField {
 public:
  MlpField(Mlp net, FieldKind kind, int k);

  FieldKind kind() const override { return kind_; }
  int num_joints() const override { return k_; }
  int main_dim() const override;
  int conditioning_dim() const override;
  double eval(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  static int expected_input_dim(FieldKind kind, int k);

 private:
  Mlp net_;
  FieldKind kind_;
  int k_;
};

/// Exact L1 geodesic distance to the identity pose.
class AnalyticIdentityField : public DistanceField {
 public:
  explicit AnalyticIdentityField(int k) : k_(k) {}
  FieldKind kind() const override { return FieldKind::kPose; }
  int num_joints() const override { return k_; }
  int main_dim() const override { return 4 * k_; }
  int conditioning_dim() const override { return 0; }
  double eval(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override;
  double pose_value_grad(const Pose& pose, PoseVelocity& g) const override;

 private:
  int k_;
};

/// Exact L1 geodesic distance to the nearest corpus pose.
class AnalyticCorpusPoseField : public DistanceField {
 public:
  explicit AnalyticCorpusPoseField(std::vector<Pose> dataset);
  FieldKind kind() const override { return FieldKind::kPose; }
  int num_joints() const override { return k_; }
  int main_dim() const override { return 4 * k_; }
  int conditioning_dim() const override { return 0; }
  double eval(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override;

 private:
  std::vector<Pose> dataset_;
  int k_;
};

/// Exact Euclidean distance to the nearest element of a flat point set.
/// Conditioning inputs, if declared, are accepted and ignored.
class AnalyticSetField : public DistanceField {
 public:
  AnalyticSetField(std::vector<Eigen::VectorXd> dataset, FieldKind kind,
                   int k);
  FieldKind kind() const override { return kind_; }
  int num_joints() const override { return k_; }
  int main_dim() const override { return 3 * k_; }
  int conditioning_dim() const override;
  double eval(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const override;

 private:
  std::vector<Eigen::VectorXd> dataset_;
  FieldKind kind_;
  int k_;
};

/// Riemannian gradient of a pose field as per-joint tangent matrices.
PoseTangent field_rgrad_pose(const DistanceField& field, const Pose& pose);

// Model serialization (versioned JSON: widths, activation tags, row-major
// float64 weights, field kind, joint count).
std::string field_to_json(const MlpField& field);
MlpField field_from_json(const std::string& text);
void write_field_file(const std::string& path, const MlpField& field);
MlpField read_field_file(const std::string& path);

}  // namespace rmf
