#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "eegbench/checks.hpp"
#include "eegbench/errors.hpp"
#include "eegbench/preprocess.hpp"
#include "eegbench/rng.hpp"
#include "support/fixtures.hpp"

using namespace eegbench;

TEST_CASE("task names and labels") {
  CHECK(parse_task("binary") == TaskKind::Binary);
  CHECK(parse_task("multiclass") == TaskKind::MultiClass);
  CHECK_THROWS_AS(parse_task("ternary"), ConfigError);
  CHECK(num_classes(TaskKind::Binary) == 2);
  CHECK(num_classes(TaskKind::MultiClass) == 5);
  CHECK(task_label(ClassLabel::Seizure, TaskKind::Binary) == 1);
  for (ClassLabel l : {ClassLabel::TumorArea, ClassLabel::HealthArea, ClassLabel::EyesClosed, ClassLabel::EyesOpen})
    CHECK(task_label(l, TaskKind::Binary) == 0);
  for (ClassLabel l : kAllLabels) CHECK(task_label(l, TaskKind::MultiClass) == label_code(l) - 1);
}

TEST_CASE("relabel") {
  const EegDataset ds = checks::synthetic_dataset(4, 1);
  const LabeledData bin = relabel(ds, TaskKind::Binary);
  CHECK(bin.rows == 20);
  CHECK(bin.cols == 178);
  CHECK(std::count(bin.labels.begin(), bin.labels.end(), 1) == 4);
  CHECK(std::count(bin.labels.begin(), bin.labels.end(), 0) == 16);
  const LabeledData multi = relabel(ds, TaskKind::MultiClass);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(multi.labels[i] == label_code(ds[i].label) - 1);
    CHECK(multi.row(i)[5] == ds[i].samples[5]);
  }

  std::string text = fixtures::csv_header();
  for (int i = 0; i < 3; ++i) text += fixtures::csv_row("s" + std::to_string(i), i, "1");
  const LabeledData all_pos = relabel(fixtures::load_string(text), TaskKind::Binary);
  CHECK(std::all_of(all_pos.labels.begin(), all_pos.labels.end(), [](int y) { return y == 1; }));
}

TEST_CASE("fit_minmax") {
  const std::vector<double> span = {3, -5, 10, 0, 7};
  const ScalerParams p = fit_minmax(span);
  CHECK(p.v_min == -5);
  CHECK(p.v_max == 10);
  const std::vector<double> constant(178, 3.0);
  const ScalerParams c = fit_minmax(constant);
  CHECK(c.v_min == 3);
  CHECK(c.v_max == 3);
  CHECK_THROWS_AS(fit_minmax(std::vector<double>{}), EmptyInputError);
}

TEST_CASE("apply_minmax") {
  const ScalerParams p{0, 10};
  CHECK(apply_minmax(p, std::vector<double>{0, 5, 10}) == std::vector<double>{-1, 0, 1});
  CHECK(apply_minmax(p, std::vector<double>{12})[0] == doctest::Approx(1.4).epsilon(1e-15));
  const ScalerParams flat{3, 3};
  for (double v : apply_minmax(flat, std::vector<double>{-100, 3, 1e9})) CHECK(v == 0.0);
}

TEST_CASE("scaled training set lies in [-1, 1]") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + rng.below(500));
    for (double& x : xs) x = rng.uniform(-1e4, 1e4);
    const ScalerParams p = fit_minmax(xs);
    for (double y : apply_minmax(p, xs)) {
      CHECK(y >= -1.0);
      CHECK(y <= 1.0);
    }
  }
}

TEST_CASE("apply_minmax is affine") {
  // apply(p, a x + b) is a fixed affine function of apply(p, x).
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const ScalerParams p{rng.uniform(-100, 0), rng.uniform(1, 100)};
    const double a = rng.uniform(0.1, 5), b = rng.uniform(-50, 50);
    const double scale = 2.0 / (p.v_max - p.v_min);
    for (int i = 0; i < 20; ++i) {
      const double x = rng.uniform(-200, 200);
      const double lhs = p.apply(a * x + b);
      const double rhs = a * p.apply(x) + (a - 1.0) + scale * (b + (a - 1.0) * p.v_min);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

namespace {

std::map<int, std::size_t> count_labels(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::map<int, std::size_t> m;
  for (auto i : idx) ++m[labels[i]];
  return m;
}

}  // namespace

TEST_CASE("stratified_split") {
  SUBCASE("two per class at ratio 0.5") {
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 3, 3, 4, 4};
    const SplitPlan s = stratified_split(labels, 0.5, 3);
    CHECK(s.train_indices.size() == 5);
    CHECK(s.test_indices.size() == 5);
    for (auto [c, n] : count_labels(labels, s.test_indices)) CHECK(n == 1);
    CHECK(s == stratified_split(labels, 0.5, 3));
  }
  SUBCASE("balanced 8:2 arithmetic") {
    // Same per-class arithmetic as the full file: 2300 per class.
    std::vector<int> labels;
    for (int i = 0; i < 11500; ++i) labels.push_back(i % 5);
    const SplitPlan s = stratified_split(labels, 0.8, 42);
    CHECK(s.train_indices.size() == 9200);
    CHECK(s.test_indices.size() == 2300);
    for (auto [c, n] : count_labels(labels, s.test_indices)) CHECK(n == 460);
    CHECK(std::is_sorted(s.test_indices.begin(), s.test_indices.end()));
  }
  SUBCASE("errors") {
    const std::vector<int> one = {0, 0, 0, 1};
    CHECK_THROWS_AS(stratified_split(one, 0.8, 1), StratificationError);
    const std::vector<int> ok = {0, 0, 1, 1};
    CHECK_THROWS_AS(stratified_split(ok, 0.0, 1), PreconditionError);
    CHECK_THROWS_AS(stratified_split(ok, 1.0, 1), PreconditionError);
    CHECK_THROWS_AS(stratified_split(std::vector<int>{}, 0.5, 1), EmptyInputError);
  }
  SUBCASE("different seeds give different plans") {
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) labels.push_back(i % 2);
    CHECK_FALSE(stratified_split(labels, 0.8, 1) == stratified_split(labels, 0.8, 2));
  }
}

TEST_CASE("kfold_stratified") {
  SUBCASE("two per class, K=2") {
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 3, 3, 4, 4};
    const std::vector<std::size_t> idx = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const FoldPlan f = kfold_stratified(idx, labels, 2, 9);
    REQUIRE(f.folds.size() == 2);
    for (const auto& fold : f.folds) {
      CHECK(fold.size() == 5);
      for (auto [c, n] : count_labels(labels, fold)) CHECK(n == 1);
    }
    CHECK(f.training_for(0) == f.folds[1]);
  }
  SUBCASE("9200 balanced indices, K=5") {
    std::vector<int> labels;
    for (int i = 0; i < 11500; ++i) labels.push_back(i % 5);
    const SplitPlan s = stratified_split(labels, 0.8, 42);
    const FoldPlan f = kfold_stratified(s.train_indices, labels, 5, 7);
    REQUIRE(f.folds.size() == 5);
    std::vector<std::size_t> all;
    for (const auto& fold : f.folds) {
      CHECK(fold.size() == 1840);
      for (auto [c, n] : count_labels(labels, fold)) CHECK(n == 368);
      all.insert(all.end(), fold.begin(), fold.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == s.train_indices);
    CHECK(f == kfold_stratified(s.train_indices, labels, 5, 7));
  }
  SUBCASE("errors") {
    const std::vector<int> labels = {0, 0, 1, 1};
    const std::vector<std::size_t> idx = {0, 1, 2, 3};
    CHECK_THROWS_AS(kfold_stratified(idx, labels, 1, 1), PreconditionError);
    CHECK_THROWS_AS(kfold_stratified(idx, labels, 3, 1), StratificationError);
  }
}

TEST_CASE("class_weights") {
  std::vector<int> bin(100, 0);
  std::fill(bin.begin(), bin.begin() + 20, 1);
  const ClassWeights w = class_weights(bin, 2);
  CHECK(w[1] == doctest::Approx(2.5));
  CHECK(w[0] == doctest::Approx(0.625));
  CHECK(w[1] / w[0] == doctest::Approx(4.0));

  const std::vector<int> balanced = {0, 1, 2, 0, 1, 2};
  for (double v : class_weights(balanced, 3).weights) CHECK(v == 1.0);

  const std::vector<int> three = {0, 1, 2, 2};
  const ClassWeights t = class_weights(three, 3);
  CHECK(t[0] == doctest::Approx(4.0 / 3.0));
  CHECK(t[1] == doctest::Approx(4.0 / 3.0));
  CHECK(t[2] == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(class_weights(std::vector<int>{0, 0}, 2), PreconditionError);
}

TEST_CASE("weighted counts sum to N") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(4));
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c) labels.push_back(c);
    const auto extra = rng.below(300);
    for (std::uint64_t i = 0; i < extra; ++i) labels.push_back(static_cast<int>(rng.below(classes)));
    const ClassWeights w = class_weights(labels, classes);
    double sum = 0.0;
    for (int y : labels) sum += w[y];
    CHECK(sum == doctest::Approx(static_cast<double>(labels.size())).epsilon(1e-12));
    for (double v : w.weights) CHECK(v > 0.0);
  }
}

TEST_CASE("plans serialize to sorted JSON arrays") {
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
  const SplitPlan s = stratified_split(labels, 0.8, 4);
  const nlohmann::json j = s;
  CHECK(j.at("test_indices").is_array());
  CHECK(j.get<SplitPlan>() == s);
  const FoldPlan f = kfold_stratified(s.train_indices, labels, 4, 2);
  const nlohmann::json jf = f;
  CHECK(jf.get<FoldPlan>() == f);
  const ScalerParams p{-3.5, 8.25};
  const nlohmann::json jp = p;
  CHECK(jp.get<ScalerParams>().v_min == -3.5);
  CHECK(jp.get<ScalerParams>().v_max == 8.25);
}
