#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

/// Column-major copy of a feature matrix plus, per feature, the row order
/// sorted by (value, row). Built once and shared by every tree of an
/// ensemble.
class SortedColumns {
 public:
  explicit SortedColumns(const LabeledData& data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double value(std::size_t row, std::size_t feature) const noexcept { return values_[feature * rows_ + row]; }
  std::span<const std::uint32_t> order(std::size_t feature) const noexcept {
    return {order_.data() + feature * rows_, rows_};
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::uint32_t> order_;
};

struct TreeConfig {
  /// Root has depth 0; nodes at max_depth become leaves. nullopt = unlimited.
  std::optional<int> max_depth;
  /// Candidate features drawn per split; 0 or >= cols means all features.
  std::size_t feature_subset_size = 0;
};

/// Binary CART tree. Internal nodes send x[feature] <= threshold left.
/// Classification leaves hold weighted class counts; regression leaves hold
/// the weighted mean target.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf = -1;  // index into leaf storage
  };

  int num_classes() const noexcept { return num_classes_; }  // 0 for regression
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept;
  int depth() const;

  /// Class counts at the leaf reached by x.
  std::span<const double> leaf_counts(std::span<const double> x) const;
  /// Leaf class frequencies, summing to 1.
  ProbPrediction class_frequencies(std::span<const double> x) const;
  double predict_value(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

 private:
  friend class TreeBuilderAccess;
  const Node& leaf_node(std::span<const double> x) const;

  int num_classes_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> leaf_values_;
};

/// Gini tree over rows with positive `sample_weights` (bootstrap counts, or
/// all ones). Splits at midpoints between consecutive distinct values; stops
/// on pure nodes, at max depth, or when no split reduces impurity.
DecisionTree fit_classification_tree(const SortedColumns& columns, std::span<const int> labels, int num_classes,
                                     std::span<const double> sample_weights, const TreeConfig& config, Rng& rng);

/// Weighted squared-error regression tree on `targets`.
DecisionTree fit_regression_tree(const SortedColumns& columns, std::span<const double> targets,
                                 std::span<const double> sample_weights, const TreeConfig& config, Rng& rng);

/// Convenience: Gini tree on every row of `train`, unit weights.
DecisionTree tree_fit(const LabeledData& train, const TreeConfig& config, Rng& rng);

}  // namespace eegbench
