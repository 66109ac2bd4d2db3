#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace rmf {

// Small dense feed-forward network with softplus activations throughout,
// including the scalar output (keeps predicted distances nonnegative).
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::VectorXd> inputs;  // activation fed into each layer
    std::vector<Eigen::VectorXd> pre;     // pre-activation per layer
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;

    void setZero();
    void scale(double s);
  };

  Mlp() = default;

  /// widths = {input, hidden..., 1}; Gaussian fan-in init.
  static Mlp create(const std::vector<int>& widths, std::mt19937_64& rng);

  double forward(const Eigen::VectorXd& x) const;
  double forward(const Eigen::VectorXd& x, Cache& cache) const;

  /// d(output)/d(input), exact reverse mode.
  Eigen::VectorXd grad_input(const Eigen::VectorXd& x) const;

  /// Accumulates upstream * d(output)/d(params) into grads; optionally
  /// also returns the input gradient.
  void backward(const Cache& cache, double upstream, Gradients& grads,
                Eigen::VectorXd* d_input = nullptr) const;

  Gradients zero_gradients() const;
  void apply_update(const Gradients& step);

  int input_dim() const { return widths_.empty() ? 0 : widths_.front(); }
  const std::vector<int>& widths() const { return widths_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  void set_parameters(std::vector<Eigen::MatrixXd> w,
                      std::vector<Eigen::VectorXd> b);

 private:
  std::vector<int> widths_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

double softplus(double x);
double softplus_derivative(double x);

}  // namespace rmf
