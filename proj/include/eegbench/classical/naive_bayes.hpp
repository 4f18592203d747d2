#pragma once

#include <span>
#include <vector>

#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

/// Gaussian naive Bayes with maximum-likelihood per-class moments.
struct GaussianNbModel {
  std::vector<double> priors;                  // [class]
  std::vector<std::vector<double>> means;      // [class][feature]
  std::vector<std::vector<double>> variances;  // [class][feature], >= floor
  double variance_floor = 0.0;
};

/// Variance floor relative to the pooled variance of all training values.
inline constexpr double kNbVarianceFloorRatio = 1e-9;

/// Throws FitError when any class has fewer than two records.
GaussianNbModel nb_fit(const LabeledData& train);

/// Posterior from log-space joint likelihoods, normalized by log-sum-exp.
ProbPrediction nb_predict(const GaussianNbModel& model, std::span<const double> x);

}  // namespace eegbench
