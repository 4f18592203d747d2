#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "eegbench/neural/network.hpp"
#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench::nn {

struct TrainConfig {
  std::size_t batch_size = 32;
  int max_epochs = 100;
  double learning_rate = 1e-3;
  int patience = 10;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0 when no epoch ran
  double best_val_accuracy = 0.0;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training on `validation.train_indices` of `data`, scoring
/// accuracy on `validation.test_indices` after every epoch. Each epoch's
/// batch order and dropout masks come from derive_seed(seed, epoch). The
/// network ends holding the parameters of its best validation epoch (the
/// earliest on ties). The network must already be initialized.
/// Throws TrainingDivergedError on a non-finite loss.
TrainResult train(Network& net, const LabeledData& data, const SplitPlan& validation, const TrainConfig& config,
                  const ClassWeights& weights, const EpochCallback& on_epoch = {});

/// Eval-mode class probabilities for every row of `data`.
std::vector<ProbPrediction> predict_proba(Network& net, const LabeledData& data);
std::vector<ProbPrediction> predict_proba(Network& net, std::span<const double> rows, std::size_t count);

/// Columns epoch,train_loss,val_accuracy.
void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace eegbench::nn
