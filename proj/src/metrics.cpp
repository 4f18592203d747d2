#include "eegbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "eegbench/errors.hpp"

namespace eegbench {

std::size_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t t = 0;
  for (int c = 0; c < num_classes_; ++c) t += at(c, c);
  return t;
}

std::size_t ConfusionMatrix::column_sum(int predicted) const noexcept {
  std::size_t s = 0;
  for (int t = 0; t < num_classes_; ++t) s += at(t, predicted);
  return s;
}

std::size_t ConfusionMatrix::row_sum(int truth) const noexcept {
  std::size_t s = 0;
  for (int p = 0; p < num_classes_; ++p) s += at(truth, p);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truths, int num_classes) {
  if (predicted.size() != truths.size()) throw PreconditionError("prediction/truth length mismatch");
  ConfusionMatrix m(num_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes)
      throw PreconditionError("label out of range in confusion matrix");
    m.add(truths[i], predicted[i]);
  }
  return m;
}

double accuracy(std::span<const int> predicted, std::span<const int> truths) {
  if (predicted.size() != truths.size()) throw PreconditionError("prediction/truth length mismatch");
  if (truths.empty()) throw PreconditionError("accuracy of an empty set is undefined");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) correct += predicted[i] == truths[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

double accuracy(std::span<const ProbPrediction> predictions, std::span<const int> truths) {
  std::vector<int> labels;
  labels.reserve(predictions.size());
  for (const auto& p : predictions) labels.push_back(argmax_label(p));
  return accuracy(labels, truths);
}

double roc_auc(std::span<const double> positive_scores, std::span<const int> truths) {
  if (positive_scores.size() != truths.size()) throw PreconditionError("score/truth length mismatch");
  std::vector<std::size_t> order(truths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double s : positive_scores)
    if (!std::isfinite(s)) throw PreconditionError("non-finite score passed to roc_auc");
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return positive_scores[a] < positive_scores[b]; });

  // Walk tie groups in ascending score order; each positive beats every
  // negative seen in earlier groups and ties with negatives in its own group.
  double numerator = 0.0;
  double negatives_below = 0.0;
  double positives = 0.0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    double pos = 0.0;
    double neg = 0.0;
    while (end < order.size() && positive_scores[order[end]] == positive_scores[order[g]]) {
      (truths[order[end]] == 1 ? pos : neg) += 1.0;
      ++end;
    }
    numerator += pos * negatives_below + 0.5 * pos * neg;
    negatives_below += neg;
    positives += pos;
    g = end;
  }
  if (positives == 0.0 || negatives_below == 0.0)
    throw UndefinedAucError("AUC needs both positive and negative truths");
  return numerator / (positives * negatives_below);
}

ClassPrecision precision_per_class(const ConfusionMatrix& confusion) {
  ClassPrecision out;
  for (int c = 0; c < confusion.num_classes(); ++c) {
    const auto predicted = confusion.column_sum(c);
    out.undefined.push_back(predicted == 0);
    out.precision.push_back(predicted == 0 ? 0.0
                                           : static_cast<double>(confusion.at(c, c)) /
                                                 static_cast<double>(predicted));
  }
  return out;
}

double overall_accuracy(const ConfusionMatrix& confusion) {
  const auto total = confusion.total();
  if (total == 0) throw PreconditionError("overall accuracy of an empty confusion matrix");
  return static_cast<double>(confusion.trace()) / static_cast<double>(total);
}

MetricsReport make_report(std::string model_id, TaskKind task, std::uint64_t seed,
                          std::span<const int> predicted, std::span<const int> truths,
                          std::span<const double> positive_scores) {
  MetricsReport r;
  r.model_id = std::move(model_id);
  r.task = task;
  r.seed = seed;
  r.class_names = class_names(task);
  r.confusion = confusion_matrix(predicted, truths, num_classes(task));
  r.accuracy = overall_accuracy(r.confusion);
  r.precision = precision_per_class(r.confusion);
  if (task == TaskKind::Binary) r.auc = roc_auc(positive_scores, truths);
  return r;
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  const int c = r.confusion.num_classes();
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < c; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < c; ++p) row.push_back(r.confusion.at(t, p));
    rows.push_back(std::move(row));
  }
  nlohmann::json precision = nlohmann::json::object();
  nlohmann::json undefined = nlohmann::json::array();
  for (int k = 0; k < c; ++k) {
    const auto& name = r.class_names[static_cast<std::size_t>(k)];
    precision[name] = r.precision.precision[static_cast<std::size_t>(k)];
    if (r.precision.undefined[static_cast<std::size_t>(k)]) undefined.push_back(name);
  }
  j = nlohmann::json{{"model", r.model_id},
                     {"task", task_name(r.task)},
                     {"seed", r.seed},
                     {"accuracy", r.accuracy},
                     {"auc", r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr)},
                     {"class_names", r.class_names},
                     {"precision", precision},
                     {"precision_undefined", undefined},
                     {"confusion", rows}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r.model_id = j.at("model").get<std::string>();
  r.task = parse_task(j.at("task").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.auc = j.at("auc").is_null() ? std::nullopt : std::optional<double>(j.at("auc").get<double>());
  r.class_names = j.at("class_names").get<std::vector<std::string>>();
  const auto& rows = j.at("confusion");
  const int c = static_cast<int>(rows.size());
  r.confusion = ConfusionMatrix(c);
  for (int t = 0; t < c; ++t)
    for (int p = 0; p < c; ++p)
      r.confusion.set(t, p, rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)].get<std::size_t>());
  r.precision = precision_per_class(r.confusion);
}

std::vector<std::string> table_cells(const MetricsReport& r) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  std::vector<std::string> cells;
  for (double p : r.precision.precision) cells.push_back(fmt(p));
  cells.push_back(fmt(r.accuracy));
  return cells;
}

}  // namespace eegbench
