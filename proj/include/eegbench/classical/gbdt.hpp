#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eegbench/classical/tree.hpp"
#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

struct GbdtConfig {
  double learning_rate = 0.1;
  int n_rounds = 100;
  int max_depth = 3;
};

/// Additive log-odds model. Two classes: one tree per round on the positive
/// class logit. More classes: one tree per class per round, coupled by softmax.
struct GbdtModel {
  GbdtConfig config;
  int num_classes = 0;
  std::vector<double> initial;                   // per ensemble
  std::vector<std::vector<DecisionTree>> rounds;  // [round][ensemble]
  /// Weighted mean training log-loss: entry 0 before any tree, entry m after round m.
  std::vector<double> train_loss;
};

/// Each round fits weighted squared-error trees to the residuals
/// y - p(x) and adds learning_rate times their output. The initial value is
/// the log-odds (or log-prior) of the weighted class rates.
/// Throws ConfigError for n_rounds < 1, FitError if a class rate is 0 or 1,
/// TrainingDivergedError on non-finite residuals.
GbdtModel gbdt_fit(const LabeledData& train, const GbdtConfig& config, const ClassWeights& weights,
                   std::uint64_t seed);

ProbPrediction gbdt_predict(const GbdtModel& model, std::span<const double> x);

/// Prediction using only the first `rounds` boosting rounds.
ProbPrediction gbdt_predict_staged(const GbdtModel& model, std::span<const double> x, std::size_t rounds);

}  // namespace eegbench
