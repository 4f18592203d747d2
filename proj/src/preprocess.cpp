#include "eegbench/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "eegbench/errors.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

std::string_view task_name(TaskKind task) noexcept {
  return task == TaskKind::Binary ? "binary" : "multiclass";
}

TaskKind parse_task(std::string_view name) {
  if (name == "binary") return TaskKind::Binary;
  if (name == "multiclass" || name == "multi-class" || name == "multilabel") return TaskKind::MultiClass;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected binary|multiclass)");
}

int num_classes(TaskKind task) noexcept { return task == TaskKind::Binary ? 2 : kNumActivityClasses; }

std::vector<std::string> class_names(TaskKind task) {
  if (task == TaskKind::Binary) return {"NonSeizure", "Seizure"};
  std::vector<std::string> names;
  for (auto label : kAllLabels) names.emplace_back(label_name(label));
  return names;
}

int task_label(ClassLabel label, TaskKind task) noexcept {
  if (task == TaskKind::Binary) return label == ClassLabel::Seizure ? 1 : 0;
  return label_code(label) - 1;
}

LabeledData LabeledData::subset(std::span<const std::size_t> indices) const {
  LabeledData out;
  out.rows = indices.size();
  out.cols = cols;
  out.num_classes = num_classes;
  out.features.reserve(indices.size() * cols);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

LabeledData relabel(const EegDataset& ds, TaskKind task) {
  LabeledData out;
  out.rows = ds.size();
  out.cols = kSamplesPerRecord;
  out.num_classes = num_classes(task);
  out.features.reserve(out.rows * out.cols);
  out.labels.reserve(out.rows);
  for (const auto& r : ds.records()) {
    out.features.insert(out.features.end(), r.samples.begin(), r.samples.end());
    out.labels.push_back(task_label(r.label, task));
  }
  return out;
}

ScalerParams fit_minmax(std::span<const double> samples) {
  if (samples.empty()) throw EmptyInputError("cannot fit a scaler on an empty training set");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  return ScalerParams{*lo, *hi};
}

ScalerParams fit_minmax(const LabeledData& train) { return fit_minmax(std::span<const double>(train.features)); }

std::vector<double> apply_minmax(const ScalerParams& p, std::span<const double> samples) {
  std::vector<double> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(), [&](double x) { return p.apply(x); });
  return out;
}

LabeledData apply_minmax(const ScalerParams& p, LabeledData data) {
  for (double& x : data.features) x = p.apply(x);
  return data;
}

namespace {

// Class index -> member positions (into `labels`), in ascending position order.
std::map<int, std::vector<std::size_t>> group_by_class(std::span<const int> labels,
                                                       std::span<const std::size_t> positions) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t p : positions) groups[labels[p]].push_back(p);
  return groups;
}

}  // namespace

SplitPlan stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw PreconditionError("split ratio must lie in (0, 1)");
  if (labels.empty()) throw EmptyInputError("cannot split an empty label set");
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  SplitPlan plan;
  plan.seed = seed;
  plan.ratio = ratio;
  Rng rng(seed);
  for (auto& [label, members] : group_by_class(labels, all)) {
    if (members.size() < 2) {
      throw StratificationError("class " + std::to_string(label) + " has " +
                                std::to_string(members.size()) +
                                " record(s); both sides of the split need one");
    }
    rng.shuffle(std::span(members));
    const auto n = members.size();
    auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    plan.train_indices.insert(plan.train_indices.end(), members.begin(), members.begin() + n_train);
    plan.test_indices.insert(plan.test_indices.end(), members.begin() + n_train, members.end());
  }
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

FoldPlan kfold_stratified(std::span<const std::size_t> indices, std::span<const int> labels,
                          std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("k-fold requires K >= 2, got " + std::to_string(k));
  FoldPlan plan;
  plan.k = k;
  plan.folds.resize(k);
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  Rng rng(seed);
  std::size_t slot = 0;
  for (auto& [label, members] : group_by_class(labels, sorted)) {
    if (members.size() < k) {
      throw StratificationError("class " + std::to_string(label) + " has " +
                                std::to_string(members.size()) + " record(s), fewer than K=" +
                                std::to_string(k));
    }
    rng.shuffle(std::span(members));
    for (std::size_t m : members) plan.folds[slot++ % k].push_back(m);
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

std::vector<std::size_t> FoldPlan::training_for(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != i) out.insert(out.end(), folds[f].begin(), folds[f].end());
  std::sort(out.begin(), out.end());
  return out;
}

ClassWeights class_weights(std::span<const int> labels, int num_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  ClassWeights w;
  const double n = static_cast<double>(labels.size());
  for (int c = 0; c < num_classes; ++c) {
    const auto count = counts[static_cast<std::size_t>(c)];
    if (count == 0) throw PreconditionError("class " + std::to_string(c) + " has no records");
    w.weights.push_back(n / (static_cast<double>(num_classes) * static_cast<double>(count)));
  }
  return w;
}

void to_json(nlohmann::json& j, const ScalerParams& p) { j = {{"v_min", p.v_min}, {"v_max", p.v_max}}; }
void from_json(const nlohmann::json& j, ScalerParams& p) {
  p.v_min = j.at("v_min").get<double>();
  p.v_max = j.at("v_max").get<double>();
}

void to_json(nlohmann::json& j, const SplitPlan& p) {
  j = {{"seed", p.seed}, {"ratio", p.ratio}, {"train_indices", p.train_indices}, {"test_indices", p.test_indices}};
}
void from_json(const nlohmann::json& j, SplitPlan& p) {
  p.seed = j.at("seed").get<std::uint64_t>();
  p.ratio = j.at("ratio").get<double>();
  p.train_indices = j.at("train_indices").get<std::vector<std::size_t>>();
  p.test_indices = j.at("test_indices").get<std::vector<std::size_t>>();
}

void to_json(nlohmann::json& j, const FoldPlan& p) { j = {{"k", p.k}, {"folds", p.folds}}; }
void from_json(const nlohmann::json& j, FoldPlan& p) {
  p.k = j.at("k").get<std::size_t>();
  p.folds = j.at("folds").get<std::vector<std::vector<std::size_t>>>();
}

}  // namespace eegbench
