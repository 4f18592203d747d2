#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eegbench/data_ingest.hpp"

namespace eegbench {

enum class TaskKind { Binary, MultiClass };

std::string_view task_name(TaskKind task) noexcept;
/// Accepts "binary" or "multiclass"; throws ConfigError otherwise.
TaskKind parse_task(std::string_view name);
int num_classes(TaskKind task) noexcept;
/// Display names of the task's class indices.
std::vector<std::string> class_names(TaskKind task);

/// Binary: Seizure -> 1, everything else -> 0. MultiClass: code - 1.
int task_label(ClassLabel label, TaskKind task) noexcept;

/// Dense row-major feature matrix with 0-based class indices.
struct LabeledData {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols, cols};
  }
  /// Copy of the given rows, in the given order.
  LabeledData subset(std::span<const std::size_t> indices) const;
};

/// Feature matrix of the dataset with labels mapped for `task`.
LabeledData relabel(const EegDataset& ds, TaskKind task);

struct ScalerParams {
  double v_min = 0.0;
  double v_max = 0.0;

  double apply(double x) const noexcept {
    if (v_max == v_min) return 0.0;
    return 2.0 * (x - v_min) / (v_max - v_min) - 1.0;
  }
};

/// Global extremes over every sample of every row. Throws EmptyInputError.
ScalerParams fit_minmax(std::span<const double> samples);
ScalerParams fit_minmax(const LabeledData& train);

/// Maps onto [-1, 1] using train extremes; out-of-range values are not clipped.
std::vector<double> apply_minmax(const ScalerParams& p, std::span<const double> samples);
LabeledData apply_minmax(const ScalerParams& p, LabeledData data);

struct SplitPlan {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  double ratio = 0.8;

  bool operator==(const SplitPlan&) const = default;
};

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::size_t k = 0;

  /// Every training index not in fold `i`, sorted.
  std::vector<std::size_t> training_for(std::size_t i) const;
  bool operator==(const FoldPlan&) const = default;
};

/// Per class, indices are shuffled by the seeded generator and the first
/// round(ratio * n_c) go to train. Each class keeps at least one record per
/// side. Index lists are returned sorted.
SplitPlan stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed);

/// Stratified K-fold over `indices` (positions into `labels`). Per-class
/// shuffled lists are dealt round-robin, continuing across classes.
FoldPlan kfold_stratified(std::span<const std::size_t> indices, std::span<const int> labels,
                          std::size_t k, std::uint64_t seed);

struct ClassWeights {
  std::vector<double> weights;

  double operator[](int label) const { return weights[static_cast<std::size_t>(label)]; }
  static ClassWeights uniform(int num_classes) {
    return ClassWeights{std::vector<double>(static_cast<std::size_t>(num_classes), 1.0)};
  }
};

/// Inverse-frequency weights N / (num_classes * count(c)).
ClassWeights class_weights(std::span<const int> labels, int num_classes);

void to_json(nlohmann::json& j, const ScalerParams& p);
void from_json(const nlohmann::json& j, ScalerParams& p);
void to_json(nlohmann::json& j, const SplitPlan& p);
void from_json(const nlohmann::json& j, SplitPlan& p);
void to_json(nlohmann::json& j, const FoldPlan& p);
void from_json(const nlohmann::json& j, FoldPlan& p);

}  // namespace eegbench
