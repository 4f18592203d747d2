#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eegbench/classical/classifier.hpp"
#include "eegbench/preprocess.hpp"

namespace eegbench {

enum class SelectionMetric { Accuracy, Auc };

using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const Params&)>;

struct GridCell {
  Params params;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  /// Set when any fold failed; such cells are never selected.
  std::optional<std::string> failure;
};

struct GridResult {
  std::size_t best_index = 0;
  Params best_params;
  std::vector<GridCell> cells;
};

/// Cartesian product of `axes` ({"k": [1, 3], "p": ["a"]}). Axes are taken
/// in key order, the first varying slowest. Scalar values are treated as
/// one-element axes.
std::vector<Params> expand_grid(const nlohmann::json& axes);

/// Scores every cell on every fold of `folds` (indices into `data`): fit on
/// the other folds, score the held-out one, average. Returns the best mean;
/// ties go to the earlier cell. With `balance_classes`, each fit receives
/// inverse-frequency weights of its own training labels. Fold fits may run in
/// parallel; unit (cell, fold) is seeded with derive_seed(seed, index).
/// Throws FitError if every cell failed.
GridResult grid_search(const ClassifierFactory& factory, const std::vector<Params>& grid, const LabeledData& data,
                       const FoldPlan& folds, SelectionMetric metric, bool balance_classes, std::uint64_t seed);

void to_json(nlohmann::json& j, const GridResult& r);

}  // namespace eegbench
