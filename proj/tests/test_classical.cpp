#include <doctest.h>

#include <cmath>
#include <limits>

#include "eegbench/classical/classifier.hpp"
#include "eegbench/classical/forest.hpp"
#include "eegbench/classical/gbdt.hpp"
#include "eegbench/classical/grid_search.hpp"
#include "eegbench/classical/knn.hpp"
#include "eegbench/classical/linear.hpp"
#include "eegbench/classical/naive_bayes.hpp"
#include "eegbench/classical/tree.hpp"
#include "eegbench/errors.hpp"
#include "eegbench/rng.hpp"
#include "support/fixtures.hpp"

using namespace eegbench;
using fixtures::make_data;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Two Gaussian blobs in `dims` dimensions, centred at -1 and +1.
LabeledData blobs(std::size_t per_class, std::size_t dims, double spread, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int c = 0; c < 2; ++c) {
      std::vector<double> x(dims);
      for (double& v : x) v = (c == 0 ? -1.0 : 1.0) + spread * rng.uniform(-1, 1);
      rows.push_back(x);
      labels.push_back(c);
    }
  }
  return make_data(rows, labels, 2);
}

double train_accuracy(const Classifier& clf, const LabeledData& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows; ++i) ok += clf.predict_label(d.row(i)) == d.labels[i];
  return static_cast<double>(ok) / static_cast<double>(d.rows);
}

}  // namespace

TEST_CASE("knn examples") {
  const LabeledData d = make_data({{0}, {1}, {10}}, {0, 0, 1}, 2);
  SUBCASE("K=3 vote fractions") {
    const KnnModel m = knn_fit(d, 3);
    const ProbPrediction p = knn_predict(m, std::vector<double>{0.5});
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("K=1 on a training point") {
    const KnnModel m = knn_fit(d, 1);
    CHECK(knn_predict(m, std::vector<double>{10})[1] == 1.0);
    CHECK(knn_predict(m, std::vector<double>{1})[0] == 1.0);
  }
  SUBCASE("K equal to the training size gives class frequencies") {
    const KnnModel m = knn_fit(d, 3);
    for (double q : {-50.0, 4.0, 1e6}) {
      const ProbPrediction p = knn_predict(m, std::vector<double>{q});
      CHECK(p[0] == doctest::Approx(2.0 / 3.0));
      CHECK(p[1] == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("tied vote goes to the class with smaller summed distance") {
    const LabeledData t = make_data({{0}, {3}, {10}, {4}}, {0, 0, 1, 1}, 2);
    const KnnModel m = knn_fit(t, 2);
    // Neighbours of 3.4: 3 (class 0, 0.4) and 4 (class 1, 0.6).
    CHECK(knn_classify(m, std::vector<double>{3.4}) == 0);
    CHECK(knn_classify(m, std::vector<double>{3.6}) == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(knn_fit(make_data({}, {}, 2), 1), EmptyInputError);
    CHECK_THROWS_AS(knn_fit(d, 0), PreconditionError);
    CHECK_THROWS_AS(knn_fit(d, 4), PreconditionError);
  }
}

TEST_CASE("linear models on a separable 1-D set") {
  const LabeledData d = make_data({{-1}, {1}}, {0, 1}, 2);
  for (LossKind loss : {LossKind::Logistic, LossKind::Hinge}) {
    LinearConfig cfg;
    cfg.loss = loss;
    cfg.l2_lambda = 1e-6;
    cfg.step_size = 1.0;
    const LinearModel m = linear_fit(d, cfg, ClassWeights::uniform(2));
    CHECK(argmax_label(linear_predict(m, std::vector<double>{-1})) == 0);
    CHECK(argmax_label(linear_predict(m, std::vector<double>{1})) == 1);
  }
}

TEST_CASE("strong L2 shrinks weights") {
  const LabeledData d = blobs(30, 4, 0.5, 2);
  LinearConfig cfg;
  cfg.l2_lambda = 1e4;
  cfg.step_size = 1e-5;
  const LinearModel m = linear_fit(d, cfg, ClassWeights::uniform(2));
  double norm = 0.0;
  for (double w : m.weights[0]) norm += w * w;
  CHECK(std::sqrt(norm) < 1e-3);
}

TEST_CASE("uniformly scaled class weights give the same decisions") {
  const LabeledData d = blobs(25, 3, 1.5, 4);
  for (LossKind loss : {LossKind::Logistic, LossKind::Hinge}) {
    LinearConfig cfg;
    cfg.loss = loss;
    const LinearModel a = linear_fit(d, cfg, ClassWeights{{1.0, 1.0}});
    const LinearModel b = linear_fit(d, cfg, ClassWeights{{2.0, 2.0}});
    for (std::size_t i = 0; i < d.rows; ++i)
      CHECK(argmax_label(linear_predict(a, d.row(i))) == argmax_label(linear_predict(b, d.row(i))));
  }
}

TEST_CASE("linear_predict hand-set models") {
  SUBCASE("all-zero multiclass model is uniform") {
    LinearModel m;
    m.num_classes = 4;
    m.weights.assign(4, std::vector<double>(3, 0.0));
    m.biases.assign(4, 0.0);
    const ProbPrediction p = linear_predict(m, std::vector<double>{5, -2, 1});
    for (double s : p.scores) CHECK(s == doctest::Approx(0.25));
  }
  SUBCASE("binary w=(1,-1), x=(2,0)") {
    LinearModel m;
    m.num_classes = 2;
    m.weights = {{1.0, -1.0}};
    m.biases = {0.0};
    const ProbPrediction p = linear_predict(m, std::vector<double>{2, 0});
    CHECK(p[1] == doctest::Approx(sigmoid(2.0)).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(sigmoid(-2.0)).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.881).epsilon(1e-3));
  }
  SUBCASE("large margin saturates") {
    LinearModel m;
    m.num_classes = 2;
    m.weights = {{1.0}};
    m.biases = {0.0};
    CHECK(linear_predict(m, std::vector<double>{800})[1] == 1.0);
    m.config.loss = LossKind::Hinge;
    CHECK(linear_predict(m, std::vector<double>{800})[1] == 1.0);
  }
  SUBCASE("hinge margin is normalized by the weight norm") {
    LinearModel m;
    m.config.loss = LossKind::Hinge;
    m.num_classes = 2;
    m.weights = {{3.0, 4.0}};
    m.biases = {1.0};
    CHECK(linear_predict(m, std::vector<double>{1, 1})[1] == doctest::Approx(sigmoid(8.0 / 5.0)).epsilon(1e-12));
  }
}

TEST_CASE("linear errors") {
  const LabeledData one = make_data({{0}, {1}}, {1, 1}, 2);
  CHECK_THROWS_AS(linear_fit(one, {}, ClassWeights::uniform(2)), FitError);
  LinearConfig bad;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(linear_fit(make_data({{0}, {1}}, {0, 1}, 2), bad, ClassWeights::uniform(2)), ConfigError);
}

TEST_CASE("naive Bayes examples") {
  SUBCASE("symmetric classes at the midpoint") {
    const GaussianNbModel m = nb_fit(make_data({{-2}, {-1}, {1}, {2}}, {0, 0, 1, 1}, 2));
    const ProbPrediction p = nb_predict(m, std::vector<double>{0});
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("closed-form posterior") {
    const GaussianNbModel m = nb_fit(make_data({{0}, {2}, {10}, {12}}, {0, 0, 1, 1}, 2));
    // Both classes have variance 1 (ML estimate); means 1 and 11.
    const double la = -0.5 * 0.0, lb = -0.5 * 100.0;
    const double expected = 1.0 / (1.0 + std::exp(lb - la));
    const ProbPrediction p = nb_predict(m, std::vector<double>{1});
    CHECK(p[0] > 0.99);
    CHECK(p[0] == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("priors alone when likelihoods match") {
    GaussianNbModel m = nb_fit(make_data({{0}, {1}, {2}, {3}}, {0, 0, 1, 1}, 2));
    m.priors = {0.9, 0.1};
    m.means = {{0.0}, {0.0}};
    m.variances = {{1.0}, {1.0}};
    const ProbPrediction p = nb_predict(m, std::vector<double>{0.3});
    CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("fewer than two records in a class") {
    CHECK_THROWS_AS(nb_fit(make_data({{0}, {1}, {2}}, {0, 0, 1}, 2)), FitError);
  }
  SUBCASE("priors sum to one and variances are floored") {
    const GaussianNbModel m = nb_fit(make_data({{5, 0}, {5, 1}, {5, 2}, {5, 3}}, {0, 0, 1, 1}, 2));
    CHECK(m.priors[0] + m.priors[1] == doctest::Approx(1.0));
    CHECK(m.variance_floor > 0.0);
    CHECK(m.variances[0][0] == m.variance_floor);
    CHECK(is_valid(nb_predict(m, std::vector<double>{5, 1.5})));
  }
}

TEST_CASE("decision tree examples") {
  Rng rng(1);
  SUBCASE("pure subset is a single leaf") {
    const DecisionTree t = tree_fit(make_data({{0}, {1}, {2}}, {1, 1, 1}, 2), {}, rng);
    CHECK(t.nodes().size() == 1);
    CHECK(t.leaf_count() == 1);
  }
  SUBCASE("two points, one midpoint split") {
    const DecisionTree t = tree_fit(make_data({{0}, {1}}, {0, 1}, 2), {}, rng);
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].threshold == 0.5);
    CHECK(argmax_label(t.class_frequencies(std::vector<double>{0})) == 0);
    CHECK(argmax_label(t.class_frequencies(std::vector<double>{1})) == 1);
  }
  SUBCASE("root split minimizes weighted Gini over every candidate") {
    // The best root split (second feature at 0.5) leaves a mixed right side
    // that needs two more cuts on the first feature.
    const LabeledData d = make_data({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}}, {0, 0, 1, 0, 1}, 2);
    const auto gini = [](double a, double b) {
      const double n = a + b;
      return n == 0 ? 0.0 : 1.0 - (a / n) * (a / n) - (b / n) * (b / n);
    };
    const auto split_impurity = [&](std::size_t f, double thr) {
      double l[2] = {0, 0}, r[2] = {0, 0};
      for (std::size_t i = 0; i < d.rows; ++i) (d.row(i)[f] <= thr ? l : r)[d.labels[i]] += 1;
      return (l[0] + l[1]) * gini(l[0], l[1]) + (r[0] + r[1]) * gini(r[0], r[1]);
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < 2; ++f)
      for (double thr : {0.5, 1.5}) best = std::min(best, split_impurity(f, thr));

    const DecisionTree t = tree_fit(d, {}, rng);
    const auto& root = t.nodes()[0];
    REQUIRE(root.feature >= 0);
    CHECK(split_impurity(static_cast<std::size_t>(root.feature), root.threshold) == doctest::Approx(best));
    CHECK(t.depth() == 3);
    for (std::size_t i = 0; i < d.rows; ++i) CHECK(argmax_label(t.class_frequencies(d.row(i))) == d.labels[i]);
  }
  SUBCASE("thresholds lie strictly between observed values") {
    Rng data_rng(3);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
      rows.push_back({std::round(data_rng.uniform(0, 20)), std::round(data_rng.uniform(0, 20)) + 0.25});
      labels.push_back(static_cast<int>(data_rng.below(3)));
    }
    const LabeledData d = make_data(rows, labels, 3);
    const DecisionTree t = tree_fit(d, {}, rng);
    // Rows routed to each node.
    std::vector<std::vector<std::size_t>> reach(t.nodes().size());
    for (std::size_t i = 0; i < d.rows; ++i) {
      int k = 0;
      while (true) {
        reach[static_cast<std::size_t>(k)].push_back(i);
        const auto& n = t.nodes()[static_cast<std::size_t>(k)];
        if (n.feature < 0) break;
        k = d.row(i)[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
      }
    }
    for (std::size_t k = 0; k < t.nodes().size(); ++k) {
      const auto& n = t.nodes()[k];
      if (n.feature < 0) continue;
      bool below = false, above = false, equal = false;
      for (std::size_t i : reach[k]) {
        const double v = d.row(i)[static_cast<std::size_t>(n.feature)];
        below = below || v < n.threshold;
        above = above || v > n.threshold;
        equal = equal || v == n.threshold;
      }
      CHECK(below);
      CHECK(above);
      CHECK_FALSE(equal);
    }
  }
  SUBCASE("max depth caps the tree") {
    const LabeledData d = blobs(40, 3, 2.0, 5);
    TreeConfig cfg;
    cfg.max_depth = 2;
    CHECK(tree_fit(d, cfg, rng).depth() <= 2);
  }
  SUBCASE("JSON round-trip") {
    const LabeledData d = blobs(20, 2, 2.0, 6);
    const DecisionTree t = tree_fit(d, {}, rng);
    const DecisionTree back = DecisionTree::from_json(t.to_json());
    for (std::size_t i = 0; i < d.rows; ++i) CHECK(back.class_frequencies(d.row(i)) == t.class_frequencies(d.row(i)));
  }
}

TEST_CASE("random forest examples") {
  SUBCASE("one full tree without bootstrap memorizes") {
    const LabeledData d = blobs(30, 5, 3.0, 7);
    ForestConfig cfg;
    cfg.n_estimators = 1;
    cfg.bootstrap = false;
    cfg.feature_subset_size = 5;
    const RandomForestModel m = rf_fit(d, cfg, 3);
    for (std::size_t i = 0; i < d.rows; ++i) CHECK(argmax_label(rf_predict(m, d.row(i))) == d.labels[i]);
  }
  SUBCASE("same seed, same forest") {
    const LabeledData d = blobs(30, 13, 2.0, 8);
    ForestConfig cfg;
    cfg.n_estimators = 15;
    const RandomForestModel a = rf_fit(d, cfg, 11);
    const RandomForestModel b = rf_fit(d, cfg, 11);
    for (std::size_t i = 0; i < d.rows; ++i) CHECK(rf_predict(a, d.row(i)) == rf_predict(b, d.row(i)));
    CHECK(a.trees.size() == 15);
  }
  SUBCASE("feature subset defaults to floor(sqrt(d))") {
    auto clf = make_classifier("rf", {{"n_estimators", 2}});
    const LabeledData d = blobs(10, 178, 2.0, 9);
    clf->fit(d, ClassWeights::uniform(2), 1);
    const auto j = clf->to_json();
    CHECK(j.at("params").at("feature_subset_size").get<std::size_t>() == 13);
    CHECK(static_cast<std::size_t>(std::floor(std::sqrt(178.0))) == 13);
  }
  SUBCASE("n_estimators < 1") {
    ForestConfig cfg;
    cfg.n_estimators = 0;
    CHECK_THROWS_AS(rf_fit(blobs(5, 2, 1.0, 1), cfg, 1), ConfigError);
  }
}

TEST_CASE("gbdt examples") {
  SUBCASE("zero learning rate predicts the base rate") {
    const LabeledData d = make_data({{0}, {1}, {2}, {3}, {4}}, {0, 0, 0, 1, 1}, 2);
    const GbdtModel m = gbdt_fit(d, {0.0, 1, 2}, ClassWeights::uniform(2), 1);
    for (double q : {-3.0, 0.0, 2.5, 100.0}) {
      const ProbPrediction p = gbdt_predict(m, std::vector<double>{q});
      CHECK(p[1] == doctest::Approx(0.4).epsilon(1e-12));
    }
  }
  SUBCASE("separable 1-D set with stumps") {
    const LabeledData d = make_data({{0}, {1}, {2}, {3}, {4}, {5}}, {0, 0, 0, 1, 1, 1}, 2);
    const GbdtModel m = gbdt_fit(d, {0.1, 50, 1}, ClassWeights::uniform(2), 1);
    for (std::size_t i = 0; i < d.rows; ++i) CHECK(argmax_label(gbdt_predict(m, d.row(i))) == d.labels[i]);
  }
  SUBCASE("training loss never rises") {
    const LabeledData d = blobs(40, 3, 3.0, 12);
    const GbdtModel m = gbdt_fit(d, {0.3, 30, 2}, ClassWeights{{0.7, 1.9}}, 2);
    REQUIRE(m.train_loss.size() == 31);
    for (std::size_t i = 1; i < m.train_loss.size(); ++i) CHECK(m.train_loss[i] <= m.train_loss[i - 1] + 1e-12);
  }
  SUBCASE("staged prediction matches a shorter model") {
    const LabeledData d = blobs(30, 3, 3.0, 13);
    const GbdtModel full = gbdt_fit(d, {0.1, 20, 3}, ClassWeights::uniform(2), 4);
    const GbdtModel short_model = gbdt_fit(d, {0.1, 7, 3}, ClassWeights::uniform(2), 4);
    for (std::size_t i = 0; i < d.rows; ++i)
      CHECK(gbdt_predict_staged(full, d.row(i), 7) == gbdt_predict(short_model, d.row(i)));
  }
  SUBCASE("multiclass") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
      rows.push_back({static_cast<double>(i % 3) * 10.0 + 0.1 * i});
      labels.push_back(i % 3);
    }
    const LabeledData d = make_data(rows, labels, 3);
    const GbdtModel m = gbdt_fit(d, {0.2, 20, 2}, ClassWeights::uniform(3), 1);
    CHECK(m.rounds.front().size() == 3);
    for (std::size_t i = 0; i < d.rows; ++i) {
      const ProbPrediction p = gbdt_predict(m, d.row(i));
      CHECK(is_valid(p));
      CHECK(argmax_label(p) == d.labels[i]);
    }
  }
  SUBCASE("errors") {
    const LabeledData d = make_data({{0}, {1}}, {0, 1}, 2);
    CHECK_THROWS_AS(gbdt_fit(d, {0.1, 0, 3}, ClassWeights::uniform(2), 1), ConfigError);
    CHECK_THROWS_AS(gbdt_fit(make_data({{0}, {1}}, {1, 1}, 2), {0.1, 3, 3}, ClassWeights::uniform(2), 1), FitError);
  }
}

TEST_CASE("grid search") {
  const LabeledData d = blobs(30, 2, 0.6, 21);
  std::vector<std::size_t> idx(d.rows);
  for (std::size_t i = 0; i < d.rows; ++i) idx[i] = i;
  const FoldPlan folds = kfold_stratified(idx, d.labels, 5, 3);
  const ClassifierFactory knn = [](const Params& p) { return make_classifier("knn", p); };

  SUBCASE("expand_grid") {
    const auto cells = expand_grid({{"n_estimators", {100, 200}}, {"max_depth", {10, 20, nullptr}}});
    CHECK(cells.size() == 6);
    CHECK(cells[0] == Params{{"max_depth", 10}, {"n_estimators", 100}});
    CHECK(cells[1] == Params{{"max_depth", 10}, {"n_estimators", 200}});
    CHECK(expand_grid(nlohmann::json::object()).size() == 1);
    CHECK(expand_grid({{"k", 3}}).front() == Params{{"k", 3}});
    CHECK_THROWS_AS(expand_grid({{"k", nlohmann::json::array()}}), ConfigError);
  }
  SUBCASE("single cell is returned") {
    const GridResult g = grid_search(knn, {Params{{"k", 3}}}, d, folds, SelectionMetric::Accuracy, false, 1);
    CHECK(g.best_index == 0);
    CHECK(g.best_params == Params{{"k", 3}});
    CHECK(g.cells.front().fold_scores.size() == 5);
  }
  SUBCASE("dominated and failing cells are never selected") {
    // 30 vs 15 rows, so k = 36 (every training row of a fold) is a plain
    // majority vote for class 0.
    std::vector<std::size_t> keep;
    for (std::size_t i = 0, ones = 0; i < d.rows; ++i)
      if (d.labels[i] == 0 || ones++ < 15) keep.push_back(i);
    const LabeledData im = d.subset(keep);
    std::vector<std::size_t> im_idx(im.rows);
    for (std::size_t i = 0; i < im.rows; ++i) im_idx[i] = i;
    const FoldPlan im_folds = kfold_stratified(im_idx, im.labels, 5, 3);
    const std::vector<Params> grid = {Params{{"k", 36}}, Params{{"k", 500}}, Params{{"k", 1}}};
    const GridResult g = grid_search(knn, grid, im, im_folds, SelectionMetric::Accuracy, false, 1);
    CHECK(g.best_index == 2);
    REQUIRE(g.cells[1].failure.has_value());
    for (std::size_t f = 0; f < 5; ++f) CHECK(g.cells[0].fold_scores[f] < g.cells[2].fold_scores[f]);
  }
  SUBCASE("ties go to the earlier cell") {
    const std::vector<Params> grid = {Params{{"k", 1}}, Params{{"k", 1}}};
    CHECK(grid_search(knn, grid, d, folds, SelectionMetric::Accuracy, false, 1).best_index == 0);
  }
  SUBCASE("all cells failing") {
    CHECK_THROWS_AS(grid_search(knn, {Params{{"k", 999}}}, d, folds, SelectionMetric::Accuracy, false, 1), FitError);
  }
}

TEST_CASE("classifier factory and artifacts") {
  const LabeledData d = blobs(20, 3, 1.0, 31);
  const std::vector<std::pair<std::string, Params>> kinds = {
      {"nb", Params::object()},
      {"logreg", {{"step_size", 0.1}}},
      {"linsvm", {{"step_size", 0.1}}},
      {"knn", {{"k", 3}}},
      {"rf", {{"n_estimators", 10}, {"max_depth", nullptr}}},
      {"gbdt", {{"n_rounds", 10}, {"max_depth", 2}}},
  };
  for (const auto& [kind, params] : kinds) {
    CAPTURE(kind);
    auto clf = make_classifier(kind, params);
    CHECK(clf->kind() == kind);
    clf->fit(d, ClassWeights::uniform(2), 5);
    CHECK(train_accuracy(*clf, d) > 0.9);
    const auto back = load_classifier(clf->to_json());
    for (std::size_t i = 0; i < d.rows; ++i) CHECK(back->predict_proba(d.row(i)) == clf->predict_proba(d.row(i)));
  }
  CHECK_THROWS_AS(make_classifier("svm", Params::object()), ConfigError);
  CHECK_THROWS_AS(make_classifier("knn", {{"neighbours", 3}}), ConfigError);
  CHECK_THROWS_AS(make_classifier("knn", {{"k", "three"}}), ConfigError);
  CHECK_THROWS_AS(load_classifier({{"kind", "mystery"}}), ConfigError);
}
