#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "eegbench/checks.hpp"
#include "eegbench/classical/classifier.hpp"
#include "eegbench/classical/forest.hpp"
#include "eegbench/classical/gbdt.hpp"
#include "eegbench/classical/knn.hpp"
#include "eegbench/classical/linear.hpp"
#include "eegbench/classical/naive_bayes.hpp"
#include "eegbench/classical/tree.hpp"
#include "eegbench/metrics.hpp"
#include "eegbench/neural/network.hpp"
#include "eegbench/neural/trainer.hpp"
#include "eegbench/preprocess.hpp"

namespace eegbench::checks {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

// Gaussian blobs, one centre per class, every class present.
LabeledData blobs(std::size_t rows, std::size_t cols, int classes, double spread, Rng& rng) {
  LabeledData d;
  d.rows = rows;
  d.cols = cols;
  d.num_classes = classes;
  std::vector<std::vector<double>> centres(static_cast<std::size_t>(classes), std::vector<double>(cols));
  for (auto& c : centres)
    for (double& v : c) v = rng.uniform(-2, 2);
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
    d.labels.push_back(y);
    for (std::size_t j = 0; j < cols; ++j)
      d.features.push_back(centres[static_cast<std::size_t>(y)][j] + spread * rng.uniform(-1, 1));
  }
  return d;
}

double pair_count_auc(std::span<const double> s, std::span<const int> y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Area under the ROC polyline through one point per distinct threshold.
double trapezoid_auc(std::span<const double> s, std::span<const int> y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double neg = static_cast<double>(y.size()) - pos;
  double area = 0.0, prev_tpr = 0.0, prev_fpr = 0.0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) (y[i] == 1 ? tp : fp) += 1;
    const double tpr = tp / pos, fpr = fp / neg;
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

bool is_partition(std::vector<std::size_t> parts, std::size_t n) {
  std::sort(parts.begin(), parts.end());
  if (parts.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (parts[i] != i) return false;
  return true;
}

}  // namespace

CheckResult auc_oracle(std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<double> fs = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> fy = {0, 0, 1, 1};
  const double fixture = roc_auc(fs, fy);
  double worst_pairs = 0.0, worst_trap = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(199));
    std::vector<double> s(n);
    std::vector<int> y(n);
    // Coarse levels on some instances force heavy ties.
    const bool coarse = rng.bernoulli(0.5);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform01();
      y[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    const double a = roc_auc(s, y);
    worst_pairs = std::max(worst_pairs, std::abs(a - pair_count_auc(s, y)));
    worst_trap = std::max(worst_trap, std::abs(a - trapezoid_auc(s, y)));
  }
  const bool ok = fixture == 0.75 && worst_pairs <= 1e-12 && worst_trap <= 1e-12;
  return {"auc_oracle", ok,
          "fixture " + std::to_string(fixture) + "; max diff vs pair counting " + fmt(worst_pairs) + ", vs trapezoid " +
              fmt(worst_trap) + " over 1000 instances"};
}

CheckResult split_invariants(std::uint64_t seed) {
  Rng rng(seed);
  int failures = 0;
  std::string first;
  auto fail = [&](int trial, const std::string& why) {
    if (!failures++) first = "fixture " + std::to_string(trial) + ": " + why;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(4));
    const std::size_t k = 2 + static_cast<std::size_t>(rng.below(5));
    const double ratio = rng.uniform(0.3, 0.9);
    // Enough records per class that each training side can fill K folds.
    const auto min_count = static_cast<std::size_t>(std::ceil((static_cast<double>(k) + 1.0) / ratio)) + 1;
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c)
      labels.insert(labels.end(), std::max<std::size_t>(min_count, 2 + rng.below(40)), c);
    rng.shuffle(std::span<int>(labels));
    const std::uint64_t s = rng.next();

    const SplitPlan plan = stratified_split(labels, ratio, s);
    std::vector<std::size_t> all = plan.train_indices;
    all.insert(all.end(), plan.test_indices.begin(), plan.test_indices.end());
    if (!is_partition(all, labels.size())) fail(trial, "split is not a partition");
    for (int c = 0; c < classes; ++c) {
      const auto n = static_cast<double>(std::count(labels.begin(), labels.end(), c));
      const auto in_train = static_cast<double>(
          std::count_if(plan.train_indices.begin(), plan.train_indices.end(), [&](std::size_t i) { return labels[i] == c; }));
      if (std::abs(in_train - ratio * n) > 1.0) fail(trial, "class " + std::to_string(c) + " off by more than 1");
    }
    if (!(stratified_split(labels, ratio, s) == plan)) fail(trial, "split not deterministic");

    const FoldPlan folds = kfold_stratified(plan.train_indices, labels, k, s);
    std::vector<std::size_t> covered;
    for (const auto& f : folds.folds) covered.insert(covered.end(), f.begin(), f.end());
    std::sort(covered.begin(), covered.end());
    if (covered != plan.train_indices) fail(trial, "folds do not partition the training indices");
    for (int c = 0; c < classes; ++c) {
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& f : folds.folds) {
        const auto m = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == c; }));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      if (hi - lo > 1) fail(trial, "class " + std::to_string(c) + " fold counts differ by " + std::to_string(hi - lo));
    }
    if (!(kfold_stratified(plan.train_indices, labels, k, s) == folds)) fail(trial, "folds not deterministic");
  }
  return {"split_invariants", failures == 0,
          failures ? std::to_string(failures) + " violations; first: " + first : "1000 fixtures: partitions exact, strata within 1, deterministic"};
}

CheckResult nb_closed_form(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.below(4));
    LabeledData train;
    train.rows = 4;
    train.cols = d;
    train.num_classes = 2;
    train.labels = {0, 0, 1, 1};
    for (std::size_t i = 0; i < 4 * d; ++i) train.features.push_back(rng.uniform(-2, 2));
    const GaussianNbModel model = nb_fit(train);

    // Floor: 1e-9 of the variance of all training values.
    double mean_all = 0.0;
    for (double v : train.features) mean_all += v / static_cast<double>(4 * d);
    double pooled = 0.0;
    for (double v : train.features) pooled += (v - mean_all) * (v - mean_all) / static_cast<double>(4 * d);
    const double floor = std::max(1e-9 * pooled, 1e-300);

    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(-2, 2);
    double joint[2];
    for (int c = 0; c < 2; ++c) {
      double density = 0.5;
      for (std::size_t j = 0; j < d; ++j) {
        const double a = train.features[(2 * static_cast<std::size_t>(c)) * d + j];
        const double b = train.features[(2 * static_cast<std::size_t>(c) + 1) * d + j];
        const double mu = (a + b) / 2.0;
        const double var = std::max((a - b) * (a - b) / 4.0, floor);
        density *= std::exp(-(x[j] - mu) * (x[j] - mu) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
      }
      joint[c] = density;
    }
    if (joint[0] + joint[1] < 1e-200) continue;  // oracle underflow; not informative
    const double p1 = joint[1] / (joint[0] + joint[1]);
    const ProbPrediction p = nb_predict(model, x);
    worst = std::max({worst, std::abs(p.scores[1] - p1), std::abs(p.scores[0] - (1.0 - p1))});
  }
  return {"nb_closed_form", worst <= 1e-12, "max posterior difference on 2x2-point fixtures: " + fmt(worst)};
}

CheckResult knn_memorization(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t misses = 0, total = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(4));
    LabeledData d;
    d.rows = 30 + rng.below(50);
    d.cols = 1 + rng.below(6);
    d.num_classes = classes;
    for (std::size_t i = 0; i < d.rows; ++i) {
      d.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
      for (std::size_t j = 0; j < d.cols; ++j) d.features.push_back(rng.uniform(-1, 1));
    }
    const KnnModel m = knn_fit(d, 1);
    for (std::size_t i = 0; i < d.rows; ++i, ++total) misses += knn_classify(m, d.row(i)) != d.labels[i];
  }
  return {"knn_memorization", misses == 0,
          "K=1 training accuracy " + std::to_string(total - misses) + "/" + std::to_string(total)};
}

CheckResult gbdt_monotone_loss(std::uint64_t seed) {
  Rng rng(seed);
  double worst_rise = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int classes = trial % 2 ? 3 : 2;
    const LabeledData d = blobs(120, 4, classes, 2.5, rng);
    ClassWeights w = ClassWeights::uniform(classes);
    for (double& v : w.weights) v = rng.uniform(0.5, 2.0);
    const GbdtModel m = gbdt_fit(d, GbdtConfig{0.1, 30, 2 + trial % 3}, w, rng.next());
    for (std::size_t i = 1; i < m.train_loss.size(); ++i)
      worst_rise = std::max(worst_rise, m.train_loss[i] - m.train_loss[i - 1]);
  }
  return {"gbdt_monotone_loss", worst_rise <= 0.0, "largest per-round training loss increase: " + fmt(worst_rise)};
}

CheckResult gbdt_staged_equivalence(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int classes : {2, 4}) {
    const LabeledData d = blobs(80, 3, classes, 2.0, rng);
    const std::uint64_t s = rng.next();
    const GbdtModel full = gbdt_fit(d, GbdtConfig{0.1, 12, 3}, ClassWeights::uniform(classes), s);
    for (int m : {1, 5, 12}) {
      const GbdtModel part = gbdt_fit(d, GbdtConfig{0.1, m, 3}, ClassWeights::uniform(classes), s);
      for (std::size_t i = 0; i < d.rows; ++i) {
        const auto a = gbdt_predict_staged(full, d.row(i), static_cast<std::size_t>(m));
        const auto b = gbdt_predict(part, d.row(i));
        for (std::size_t c = 0; c < a.size(); ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
      }
    }
  }
  return {"gbdt_staged_equivalence", worst == 0.0, "max difference staged vs refit: " + fmt(worst)};
}

CheckResult linear_monotone_loss(std::uint64_t seed) {
  Rng rng(seed);
  double worst_rise = 0.0;
  for (LossKind loss : {LossKind::Logistic, LossKind::Hinge}) {
    for (int trial = 0; trial < 6; ++trial) {
      const int classes = trial % 2 ? 3 : 2;
      const LabeledData d = blobs(90, 5, classes, 3.0, rng);
      const double step = std::vector<double>{1.0, 0.1, 0.01}[static_cast<std::size_t>(trial % 3)];
      const LinearModel m = linear_fit(d, LinearConfig{loss, 1e-4, step, 200, 1e-8}, class_weights(d.labels, classes));
      for (const auto& h : m.loss_history)
        for (std::size_t i = 1; i < h.size(); ++i) worst_rise = std::max(worst_rise, h[i] - h[i - 1]);
    }
  }
  return {"linear_monotone_loss", worst_rise <= 0.0, "largest per-epoch objective increase: " + fmt(worst_rise)};
}

CheckResult tree_affine_invariance(std::uint64_t seed) {
  Rng rng(seed);
  constexpr double alpha = 2.5, beta = -1.0;
  std::size_t mismatches = 0, total = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int classes = 2 + trial % 3;
    LabeledData d = blobs(100, 4, classes, 3.0, rng);
    LabeledData t = d;
    for (double& v : t.features) v = alpha * v + beta;
    const std::uint64_t s = rng.next();
    const std::optional<int> depth = trial % 2 ? std::optional<int>(4) : std::nullopt;

    Rng r1(s), r2(s);
    const DecisionTree a = tree_fit(d, TreeConfig{depth, 0}, r1);
    const DecisionTree b = tree_fit(t, TreeConfig{depth, 0}, r2);
    const RandomForestModel fa = rf_fit(d, ForestConfig{15, depth, 0, true}, s);
    const RandomForestModel fb = rf_fit(t, ForestConfig{15, depth, 0, true}, s);
    for (std::size_t i = 0; i < d.rows; ++i, ++total) {
      mismatches += a.class_frequencies(d.row(i)) != b.class_frequencies(t.row(i));
      mismatches += rf_predict(fa, d.row(i)) != rf_predict(fb, t.row(i));
    }
  }
  return {"tree_affine_invariance", mismatches == 0,
          std::to_string(mismatches) + " differing predictions out of " + std::to_string(2 * total) +
              " (tree and forest, x -> 2.5x - 1)"};
}

CheckResult prob_validity_fuzz(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t invalid = 0, total = 0;
  std::string first;
  auto probe = [&](const std::string& who, const ProbPrediction& p) {
    ++total;
    if (!is_valid(p) && !invalid++) first = who;
  };
  // Magnitudes from 1e-3 up to 1e150, random sign.
  auto query = [&](std::size_t cols) {
    std::vector<double> x(cols);
    for (double& v : x) v = (rng.bernoulli(0.5) ? 1.0 : -1.0) * std::pow(10.0, rng.uniform(-3.0, 150.0) * (rng.bernoulli(0.7) ? 0.01 : 1.0));
    return x;
  };
  for (int classes : {2, 5}) {
    const LabeledData d = blobs(60, 6, classes, 1.0, rng);
    const ClassWeights w = class_weights(d.labels, classes);
    const std::vector<std::pair<std::string, Params>> kinds = {
        {"knn", {{"k", 3}}},  {"logreg", {{"max_epochs", 50}}},    {"linsvm", {{"max_epochs", 50}}},
        {"nb", Params::object()}, {"rf", {{"n_estimators", 10}}}, {"gbdt", {{"n_rounds", 10}}}};
    for (const auto& [kind, params] : kinds) {
      auto clf = make_classifier(kind, params);
      clf->fit(d, w, rng.next());
      for (int q = 0; q < 300; ++q) probe(kind, clf->predict_proba(query(d.cols)));
    }
    nn::Network net = nn::build_cnn(classes, 3, 3, 24);
    net.initialize(rng.next());
    std::vector<double> rows;
    for (int q = 0; q < 100; ++q) {
      const auto x = query(24);
      for (double v : x) rows.push_back(std::clamp(v, -1e6, 1e6));
    }
    for (const auto& p : nn::predict_proba(net, rows, 100)) probe("cnn", p);
  }
  return {"prob_validity_fuzz", invalid == 0,
          std::to_string(total - invalid) + "/" + std::to_string(total) + " valid" + (invalid ? "; first invalid from " + first : "")};
}

const std::vector<Check>& property_checks() {
  static const std::vector<Check> all = {
      {"gradient_checks", 7, gradient_checks},
      {"bptt_oracle", 7, bptt_oracle},
      {"auc_oracle", 8, auc_oracle},
      {"split_invariants", 9, split_invariants},
      {"nb_closed_form", 10, nb_closed_form},
      {"knn_memorization", 10, knn_memorization},
      {"gbdt_monotone_loss", 10, gbdt_monotone_loss},
      {"tree_affine_invariance", 10, tree_affine_invariance},
      {"prob_validity_fuzz", 10, prob_validity_fuzz},
      {"gbdt_staged_equivalence", 0, gbdt_staged_equivalence},
      {"linear_monotone_loss", 0, linear_monotone_loss},
      {"softmax_stability", 0, softmax_stability},
      {"dropout_expectation", 0, dropout_expectation},
  };
  return all;
}

}  // namespace eegbench::checks
