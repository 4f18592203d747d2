#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

enum class LossKind { Logistic, Hinge };

std::string_view loss_name(LossKind loss) noexcept;

struct LinearConfig {
  LossKind loss = LossKind::Logistic;
  double l2_lambda = 1e-4;
  double step_size = 0.1;
  int max_epochs = 500;
  /// Early exit once an accepted step changes the objective by less than this.
  double tolerance = 1e-8;
};

/// One-versus-all linear scorer. For two classes a single model scores the
/// positive class (index 1).
struct LinearModel {
  LinearConfig config;
  int num_classes = 0;
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
  /// Objective value per epoch, one series per binary problem.
  std::vector<std::vector<double>> loss_history;
};

/// Full-batch gradient descent on weighted-mean loss + lambda * ||w||^2.
/// A step that would raise the objective is rejected and the step size
/// halved, so every recorded objective series is non-increasing.
/// Throws TrainingDivergedError on a non-finite objective and FitError with
/// fewer than two classes present.
LinearModel linear_fit(const LabeledData& train, const LinearConfig& config, const ClassWeights& weights);

/// Logistic: sigmoid(w.x + b). Hinge: sigmoid((w.x + b) / ||w||). Two
/// classes give (1 - p, p); more are normalized by their sum.
ProbPrediction linear_predict(const LinearModel& model, std::span<const double> x);

/// Raw decision value w_c.x + b_c for one-vs-all problem `c`.
double linear_decision(const LinearModel& model, std::size_t c, std::span<const double> x);

}  // namespace eegbench
