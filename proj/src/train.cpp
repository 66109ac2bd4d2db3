#include "rmf/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace rmf {

namespace {

std::vector<double> predictions(const MlpField& field, const LabeledSet& set) {
  std::vector<double> out;
  out.reserve(set.samples.size());
  for (const auto& s : set.samples) out.push_back(field.eval(s.input));
  return out;
}

}  // namespace

double mean_l1(const MlpField& field, const LabeledSet& set) {
  if (set.samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : set.samples) {
    sum += std::abs(field.eval(s.input) - s.distance);
  }
  return sum / set.samples.size();
}

double pearson(const MlpField& field, const LabeledSet& set) {
  const auto pred = predictions(field, set);
  const std::size_t n = pred.size();
  if (n < 2) return 0.0;
  double mp = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += pred[i];
    ml += set.samples[i].distance;
  }
  mp /= n;
  ml /= n;
  double cov = 0.0, vp = 0.0, vl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = pred[i] - mp;
    const double b = set.samples[i].distance - ml;
    cov += a * b;
    vp += a * a;
    vl += b * b;
  }
  const double denom = std::sqrt(vp * vl);
  return denom > 0.0 ? cov / denom : 0.0;
}

MlpField train_field(const LabeledSet& train, const LabeledSet* heldout,
                     const TrainConfig& config, TrainReport* report) {
  if (train.samples.empty()) {
    throw std::invalid_argument("train_field: empty training set");
  }
  const int input_dim = MlpField::expected_input_dim(train.kind, train.k);
  if (train.samples[0].input.size() != input_dim) {
    throw std::invalid_argument("train_field: sample dim mismatch");
  }

  std::vector<int> widths;
  widths.push_back(input_dim);
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);

  std::mt19937_64 rng(config.seed);
  Mlp net = Mlp::create(widths, rng);
  if (config.first_layer_gain != 1.0) {
    auto w = net.weights();
    w[0] *= config.first_layer_gain;
    net.set_parameters(std::move(w), net.biases());
  }

  Mlp::Gradients velocity = net.zero_gradients();
  Mlp::Gradients batch_grads = net.zero_gradients();

  const int n = static_cast<int>(train.samples.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport local;
  Mlp::Cache cache;
  double lr = config.learning_rate;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int end = std::min(start + config.batch_size, n);
      batch_grads.setZero();
      for (int i = start; i < end; ++i) {
        const LabeledSample& s = train.samples[order[i]];
        const double pred = net.forward(s.input, cache);
        const double err = pred - s.distance;
        epoch_sum += std::abs(err);
        const double upstream = err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0);
        net.backward(cache, upstream / (end - start), batch_grads);
      }
      velocity.scale(config.momentum);
      for (std::size_t l = 0; l < velocity.d_weights.size(); ++l) {
        velocity.d_weights[l] -= lr * batch_grads.d_weights[l];
        velocity.d_biases[l] -= lr * batch_grads.d_biases[l];
      }
      net.apply_update(velocity);
    }
    lr *= config.lr_decay;
    local.epoch_loss.push_back(epoch_sum / n);
  }

  MlpField field(std::move(net), train.kind, train.k);
  local.train_l1 = mean_l1(field, train);
  local.train_pearson = pearson(field, train);
  if (heldout != nullptr) {
    local.heldout_l1 = mean_l1(field, *heldout);
    local.heldout_pearson = pearson(field, *heldout);
  }
  if (report != nullptr) *report = local;
  return field;
}

std::string train_report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["epoch_loss"] = report.epoch_loss;
  j["train_l1"] = report.train_l1;
  j["heldout_l1"] = report.heldout_l1;
  j["train_pearson"] = report.train_pearson;
  j["heldout_pearson"] = report.heldout_pearson;
  return j.dump(2) + "\n";
}

}  // namespace rmf
