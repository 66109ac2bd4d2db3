#include "rmf/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace rmf {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_derivative(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return std::exp(x);
  return 1.0 / (1.0 + std::exp(-x));
}

void Mlp::Gradients::setZero() {
  for (auto& m : d_weights) m.setZero();
  for (auto& v : d_biases) v.setZero();
}

void Mlp::Gradients::scale(double s) {
  for (auto& m : d_weights) m *= s;
  for (auto& v : d_biases) v *= s;
}

Mlp Mlp::create(const std::vector<int>& widths, std::mt19937_64& rng) {
  if (widths.size() < 2 || widths.back() != 1) {
    throw std::invalid_argument("Mlp: widths must end in a scalar output");
  }
  Mlp net;
  net.widths_ = widths;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double scale = std::sqrt(2.0 / widths[l]);
    Eigen::MatrixXd w(widths[l + 1], widths[l]);
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) w(i, j) = scale * gauss(rng);
    }
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
  }
  return net;
}

double Mlp::forward(const Eigen::VectorXd& x) const {
  Cache cache;
  return forward(x, cache);
}

double Mlp::forward(const Eigen::VectorXd& x, Cache& cache) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("Mlp: input dimension mismatch");
  }
  cache.inputs.clear();
  cache.pre.clear();
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    cache.inputs.push_back(h);
    Eigen::VectorXd z = weights_[l] * h + biases_[l];
    cache.pre.push_back(z);
    h = z.unaryExpr([](double v) { return softplus(v); });
  }
  return h[0];
}

void Mlp::backward(const Cache& cache, double upstream, Gradients& grads,
                   Eigen::VectorXd* d_input) const {
  Eigen::VectorXd delta(1);
  delta[0] = upstream;
  for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
    const Eigen::VectorXd dact = cache.pre[l].unaryExpr(
        [](double v) { return softplus_derivative(v); });
    delta = delta.cwiseProduct(dact);
    grads.d_weights[l].noalias() += delta * cache.inputs[l].transpose();
    grads.d_biases[l] += delta;
    delta = (weights_[l].transpose() * delta).eval();
  }
  if (d_input != nullptr) *d_input = delta;
}

Eigen::VectorXd Mlp::grad_input(const Eigen::VectorXd& x) const {
  Cache cache;
  forward(x, cache);
  Eigen::VectorXd delta(1);
  delta[0] = 1.0;
  for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
    const Eigen::VectorXd dact = cache.pre[l].unaryExpr(
        [](double v) { return softplus_derivative(v); });
    delta = (weights_[l].transpose() * delta.cwiseProduct(dact).eval()).eval();
  }
  return delta;
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    g.d_weights.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(),
                                                weights_[l].cols()));
    g.d_biases.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

void Mlp::apply_update(const Gradients& step) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] += step.d_weights[l];
    biases_[l] += step.d_biases[l];
  }
}

void Mlp::set_parameters(std::vector<Eigen::MatrixXd> w,
                         std::vector<Eigen::VectorXd> b) {
  if (w.size() != weights_.size() || b.size() != biases_.size()) {
    throw std::invalid_argument("Mlp: parameter shape mismatch");
  }
  weights_ = std::move(w);
  biases_ = std::move(b);
}

}  // namespace rmf
