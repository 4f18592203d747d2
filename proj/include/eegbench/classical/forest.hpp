#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eegbench/classical/tree.hpp"
#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

struct ForestConfig {
  int n_estimators = 200;
  std::optional<int> max_depth;
  /// 0 selects floor(sqrt(number of features)).
  std::size_t feature_subset_size = 0;
  /// Off only in tests: every tree then sees the full training set once.
  bool bootstrap = true;
};

struct RandomForestModel {
  ForestConfig config;
  int num_classes = 0;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;
};

/// Tree t uses the generator seeded by derive_seed(seed, t) for its
/// bootstrap draw and its per-split feature subsets, so the forest does not
/// depend on how trees are scheduled across threads.
RandomForestModel rf_fit(const LabeledData& train, const ForestConfig& config, std::uint64_t seed);

/// Mean of per-tree leaf class frequencies.
ProbPrediction rf_predict(const RandomForestModel& model, std::span<const double> x);

}  // namespace eegbench
