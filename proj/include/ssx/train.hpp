#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssx/ssn.hpp"

namespace ssx {

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 1;
  int batch = 32;
  uint64_t seed = 0;
  std::string optimizer = "adam";  // adam | sgd
  double load_lambda = 0.0;
};

struct TrainExample {
  const Complex* complex = nullptr;
  FeatureSet features;
  int label = 0;
};

struct MetricRow {
  int epoch = 0;
  std::string split;  // train | eval
  double loss = 0.0;
  double accuracy = 0.0;
};

// Loss and accuracy over a dataset with noise-free gates; no updates.
double evaluate_ssn(SsnModel& model, const std::vector<TrainExample>& data,
                    double load_lambda, double* accuracy = nullptr);

// Minibatch training with deterministic shuffling and gate-noise draws
// derived from cfg.seed. Returns one train row per epoch, plus an eval row
// when eval is nonempty. lr = 0 leaves the parameters unchanged.
std::vector<MetricRow> train_ssn(SsnModel& model,
                                 const std::vector<TrainExample>& train,
                                 const std::vector<TrainExample>& eval,
                                 const TrainConfig& cfg);

}  // namespace ssx
