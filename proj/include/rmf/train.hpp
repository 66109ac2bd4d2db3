#pragma once

#include <cstdint>
#include <string>

#include "rmf/field.hpp"

namespace rmf {

struct TrainConfig {
  std::vector<int> hidden = {256, 256, 128};
  double learning_rate = 1e-3;
  double lr_decay = 1.0;  // multiplicative per-epoch decay
  double momentum = 0.9;
  // Extra scale on the first-layer init. The distance targets vary on a much
  // finer scale than the unit-norm inputs, so a bandwidth-raising first layer
  // (random-feature style) speeds up fitting considerably.
  double first_layer_gain = 8.0;
  int epochs = 200;
  int batch_size = 64;
  std::uint64_t seed = 7;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean L1 per epoch
  double train_l1 = 0.0;
  double heldout_l1 = 0.0;
  double train_pearson = 0.0;
  double heldout_pearson = 0.0;
};

/// Mean-L1 regression of the labeled distances with minibatch SGD and
/// momentum. Deterministic given config.seed.
MlpField train_field(const LabeledSet& train, const LabeledSet* heldout,
                     const TrainConfig& config, TrainReport* report = nullptr);

double mean_l1(const MlpField& field, const LabeledSet& set);
double pearson(const MlpField& field, const LabeledSet& set);

std::string train_report_to_json(const TrainReport& report);

}  // namespace rmf
