#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

/// C x C counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes)
      : num_classes_(num_classes), counts_(static_cast<std::size_t>(num_classes * num_classes), 0) {}

  int num_classes() const noexcept { return num_classes_; }
  std::size_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
  void add(int truth, int predicted) { ++counts_.at(index(truth, predicted)); }
  void set(int truth, int predicted, std::size_t n) { counts_.at(index(truth, predicted)) = n; }

  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
  std::size_t column_sum(int predicted) const noexcept;
  std::size_t row_sum(int truth) const noexcept;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int t, int p) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(num_classes_) + static_cast<std::size_t>(p);
  }

  int num_classes_ = 0;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truths, int num_classes);

/// Fraction of argmax predictions (ties to the lowest class) equal to truth.
double accuracy(std::span<const ProbPrediction> predictions, std::span<const int> truths);
double accuracy(std::span<const int> predicted, std::span<const int> truths);

/// Mann-Whitney AUC: P(score_pos > score_neg) with ties counted as 1/2.
/// Computed with one sort and tie groups. Throws UndefinedAucError when a
/// class is missing.
double roc_auc(std::span<const double> positive_scores, std::span<const int> truths);

struct ClassPrecision {
  std::vector<double> precision;
  /// Set where the class was never predicted; precision is then 0.
  std::vector<bool> undefined;
};

ClassPrecision precision_per_class(const ConfusionMatrix& confusion);

/// trace / total.
double overall_accuracy(const ConfusionMatrix& confusion);

struct MetricsReport {
  std::string model_id;
  TaskKind task = TaskKind::MultiClass;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::optional<double> auc;
  std::vector<std::string> class_names;
  ClassPrecision precision;
  ConfusionMatrix confusion;
};

/// Builds a report from hard predictions. `positive_scores` is required for
/// the binary task (AUC) and ignored otherwise.
MetricsReport make_report(std::string model_id, TaskKind task, std::uint64_t seed,
                          std::span<const int> predicted, std::span<const int> truths,
                          std::span<const double> positive_scores = {});

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

/// Precision per class followed by overall accuracy, each to 3 decimals.
std::vector<std::string> table_cells(const MetricsReport& r);

}  // namespace eegbench
