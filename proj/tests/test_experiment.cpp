#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "eegbench/checks.hpp"
#include "eegbench/errors.hpp"
#include "eegbench/experiment.hpp"
#include "support/fixtures.hpp"

using namespace eegbench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Synthetic CSV shared by the tests in this file.
const fs::path& synthetic_csv() {
  static fixtures::TempDir dir("exp-data");
  static const fs::path path = [] {
    const fs::path p = dir / "synthetic.csv";
    write_csv(checks::synthetic_dataset(60, 21), p);
    return p;
  }();
  return path;
}

ExperimentConfig quick_config(ModelKind model, TaskKind task, const fs::path& out) {
  ExperimentConfig c;
  c.data_path = synthetic_csv();
  c.model = model;
  c.task = task;
  c.seed = 42;
  c.fast_mode = true;
  c.out_dir = out;
  if (model == ModelKind::Cnn) c.params = {{"k1", 5}, {"k2", 3}, {"max_epochs", 3}};
  if (model == ModelKind::Gru || model == ModelKind::Lstm) c.params = {{"max_epochs", 2}};
  return c;
}

std::vector<std::size_t> as_indices(const json& j) { return j.get<std::vector<std::size_t>>(); }

bool disjoint(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.empty();
}

MetricsReport fake_report(ModelKind m, TaskKind task, double seizure_hit) {
  // Five records per class; the Seizure column is driven by `seizure_hit`.
  const int classes = num_classes(task);
  std::vector<int> truth, pred;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < 10; ++i) {
      truth.push_back(c);
      pred.push_back(i < 10 * seizure_hit ? c : (c + 1) % classes);
    }
  }
  std::vector<double> scores;
  for (std::size_t i = 0; i < truth.size(); ++i) scores.push_back(pred[i] == 1 ? 0.9 : 0.1);
  return make_report(std::string(model_name(m)), task, 1, pred, truth, scores);
}

}  // namespace

TEST_CASE("model identities") {
  CHECK(kAllModels.size() == 9);
  for (ModelKind m : kAllModels) CHECK(parse_model(model_name(m)) == m);
  CHECK(model_display_name(ModelKind::Linsvm) == "Linear SVM");
  CHECK(is_deep(ModelKind::Lstm));
  CHECK_FALSE(is_deep(ModelKind::Gbdt));
  CHECK_THROWS_AS(parse_model("svm"), ConfigError);
}

TEST_CASE("config parsing") {
  const json j = {{"data", "x.csv"}, {"task", "multiclass"}, {"model", "rf"}, {"seed", 7},
                  {"params", {{"n_estimators", 50}}}, {"fast", true}, {"out", "res"}, {"cv_folds", 3}};
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.task == TaskKind::MultiClass);
  CHECK(c.model == ModelKind::Rf);
  CHECK(*c.seed == 7);
  CHECK(c.cv_folds == 3);
  CHECK(config_to_json(c) == j);

  CHECK_THROWS_AS(config_from_json({{"model", "rf"}}), ConfigError);  // no seed
  CHECK_THROWS_AS(config_from_json({{"seed", 1}, {"modle", "rf"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"seed", 1}, {"task", "ternary"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"seed", "one"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"seed", 1}, {"params", 3}}), ConfigError);
}

TEST_CASE("prepare") {
  const EegDataset ds = checks::synthetic_dataset(200, 5);
  SUBCASE("fast mode keeps a stratified 500-record subsample") {
    const PreparedData p = prepare(ds, TaskKind::MultiClass, 3, true);
    CHECK(p.source_rows.size() == kFastModeRecords);
    std::map<int, int> per_class;
    for (int y : p.scaled.labels) ++per_class[y];
    for (auto [c, n] : per_class) CHECK(n == 100);
    CHECK(p.split.test_indices.size() == 100);
  }
  SUBCASE("scaling uses the training rows only") {
    const PreparedData p = prepare(ds, TaskKind::Binary, 3, false);
    CHECK(p.source_rows.size() == ds.size());
    const LabeledData train = p.scaled.subset(p.split.train_indices);
    CHECK(*std::min_element(train.features.begin(), train.features.end()) == -1.0);
    CHECK(*std::max_element(train.features.begin(), train.features.end()) == 1.0);
    CHECK(prepare(ds, TaskKind::Binary, 3, false).split == p.split);
  }
}

TEST_CASE("classical run writes recomputable artifacts") {
  fixtures::TempDir out("exp-run");
  ExperimentConfig c = quick_config(ModelKind::Knn, TaskKind::Binary, out.path());
  const RunResult r = run_experiment(c);
  REQUIRE(r.status == "complete");
  REQUIRE(r.metrics.has_value());
  const fs::path dir = out / "binary" / "knn";
  for (const char* f : {"result.json", "model.json", "split_manifest.json", "metrics.json", "grid.json"})
    CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "history.csv"));

  SUBCASE("test isolation is visible in the manifest") {
    const json m = read_json(dir / "split_manifest.json");
    const auto test = as_indices(m.at("split").at("test_indices"));
    const auto train = as_indices(m.at("split").at("train_indices"));
    CHECK(disjoint(test, train));
    std::vector<std::size_t> fold_union;
    for (const auto& fold : m.at("cv_folds").at("folds")) {
      CHECK(disjoint(as_indices(fold), test));
      for (auto i : as_indices(fold)) fold_union.push_back(i);
    }
    std::sort(fold_union.begin(), fold_union.end());
    CHECK(fold_union == train);
  }
  SUBCASE("timings") {
    const PhaseTimings& t = r.timings;
    for (double v : {t.load, t.preprocess, t.tune, t.fit, t.evaluate, t.total}) CHECK(v > 0.0);
    CHECK(t.load + t.preprocess + t.tune + t.fit + t.evaluate <= t.total);
  }
  SUBCASE("metrics are recomputable from the saved model") {
    const MetricsReport again = recompute_metrics(dir, load_csv(synthetic_csv()));
    CHECK(json(again).dump() == json(*r.metrics).dump());
    CHECK(json(again).dump() == read_json(dir / "metrics.json").dump());
  }
  SUBCASE("result.json round-trips") {
    const RunResult back = result_from_json(read_json(dir / "result.json"));
    CHECK(back.status == "complete");
    CHECK(back.chosen_params == r.chosen_params);
    CHECK(json(*back.metrics).dump() == json(*r.metrics).dump());
  }
  SUBCASE("same seed, same metrics bytes") {
    fixtures::TempDir again("exp-run2");
    c.out_dir = again.path();
    run_experiment(c);
    CHECK(fixtures::read_file(again / "binary" / "knn" / "metrics.json") == fixtures::read_file(dir / "metrics.json"));
  }
}

TEST_CASE("deep run keeps validation rows inside the training split") {
  fixtures::TempDir out("exp-deep");
  const RunResult r = run_experiment(quick_config(ModelKind::Cnn, TaskKind::MultiClass, out.path()));
  REQUIRE(r.status == "complete");
  const fs::path dir = out / "multiclass" / "cnn";
  CHECK(fs::exists(dir / "history.csv"));
  CHECK_FALSE(fs::exists(dir / "grid.json"));
  CHECK(r.chosen_params.at("k1") == 5);
  CHECK(r.chosen_params.at("max_epochs") == 3);

  const json m = read_json(dir / "split_manifest.json");
  const auto test = as_indices(m.at("split").at("test_indices"));
  const auto vtrain = as_indices(m.at("validation").at("train_indices"));
  const auto vtest = as_indices(m.at("validation").at("test_indices"));
  CHECK(disjoint(test, vtrain));
  CHECK(disjoint(test, vtest));
  CHECK(disjoint(vtrain, vtest));
  CHECK(vtrain.size() + vtest.size() == as_indices(m.at("split").at("train_indices")).size());

  const MetricsReport again = recompute_metrics(dir, load_csv(synthetic_csv()));
  CHECK(json(again).dump() == json(*r.metrics).dump());
}

TEST_CASE("cnn kernel search runs the 3x3 grid") {
  fixtures::TempDir out("exp-kernels");
  ExperimentConfig c = quick_config(ModelKind::Cnn, TaskKind::Binary, out.path());
  c.params = {{"max_epochs", 1}, {"tune_epochs", 1}};
  const RunResult r = run_experiment(c);
  CHECK(r.tuning.at("kernel_search").size() == 9);
  const auto k1 = r.chosen_params.at("k1").get<int>();
  CHECK((k1 == 3 || k1 == 5 || k1 == 7));
}

TEST_CASE("failures leave a failed result.json") {
  fixtures::TempDir out("exp-fail");
  SUBCASE("bad parameter") {
    ExperimentConfig c = quick_config(ModelKind::Rf, TaskKind::Binary, out.path());
    c.params = {{"trees", 10}};
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    const json r = read_json(out / "binary" / "rf" / "result.json");
    CHECK(r.at("status") == "failed");
    CHECK(r.at("error").at("kind") == "config");
    CHECK_FALSE(fs::exists(out / "binary" / "rf" / "metrics.json"));
  }
  SUBCASE("missing data file") {
    ExperimentConfig c = quick_config(ModelKind::Nb, TaskKind::Binary, out.path());
    c.data_path = out / "nothing.csv";
    CHECK_THROWS_AS(run_experiment(c), IoError);
    CHECK(read_json(out / "binary" / "nb" / "result.json").at("error").at("kind") == "io");
  }
  SUBCASE("unseeded") {
    ExperimentConfig c = quick_config(ModelKind::Nb, TaskKind::Binary, out.path());
    c.seed.reset();
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
  }
}

TEST_CASE("suite: 18 runs, shared splits, stable manifests") {
  fixtures::TempDir out("exp-suite");
  ExperimentConfig base = quick_config(ModelKind::Nb, TaskKind::Binary, out.path());
  base.params = {{"cnn", {{"k1", 5}, {"k2", 3}, {"max_epochs", 2}}},
                 {"gru", {{"max_epochs", 1}}},
                 {"lstm", {{"max_epochs", 1}}},
                 {"rf", {{"n_estimators", 10}}}};
  const std::vector<ModelKind> models(kAllModels.begin(), kAllModels.end());
  const std::vector<TaskKind> tasks = {TaskKind::Binary, TaskKind::MultiClass};
  const auto results = run_suite(base, models, tasks);
  REQUIRE(results.size() == 18);
  for (const auto& r : results) CHECK(r.status == "complete");
  for (const char* f : {"table1.md", "table1.csv", "fig3.csv", "suite.json"}) CHECK(fs::exists(out / f));

  for (TaskKind task : tasks) {
    const std::string t(task_name(task));
    const auto reference = read_json(out / t / "nb" / "split_manifest.json").at("split");
    for (ModelKind m : kAllModels)
      CHECK(read_json(out / t / std::string(model_name(m)) / "split_manifest.json").at("split") == reference);
  }

  std::istringstream table(fixtures::read_file(out / "table1.md"));
  int lines = 0;
  for (std::string line; std::getline(table, line);) ++lines;
  CHECK(lines == 2 + 9);

  // Re-running the split preparation with the same seed yields the same manifests.
  fixtures::TempDir again("exp-suite2");
  base.out_dir = again.path();
  run_suite(base, {ModelKind::Nb}, tasks);
  for (TaskKind task : tasks) {
    const std::string t(task_name(task));
    CHECK(fixtures::read_file(again / t / "nb" / "split_manifest.json") ==
          fixtures::read_file(out / t / "nb" / "split_manifest.json"));
  }

  SUBCASE("report regenerates the tables") {
    const std::string before = fixtures::read_file(out / "table1.md");
    fs::remove(out / "table1.md");
    fs::remove(out / "fig3.csv");
    const TableOutput t = emit_reports(out.path());
    CHECK(t.warnings.empty());
    CHECK(fixtures::read_file(out / "table1.md") == before);
    CHECK(fs::exists(out / "fig3.csv"));
  }
}

TEST_CASE("emit_table1") {
  std::vector<MetricsReport> full;
  for (ModelKind m : kAllModels) full.push_back(fake_report(m, TaskKind::MultiClass, m == ModelKind::Gbdt ? 1.0 : 0.6));
  SUBCASE("full input: nine rows in table order, best values flagged") {
    const TableOutput t = emit_table1(full);
    CHECK(t.warnings.empty());
    std::istringstream md(t.markdown);
    std::vector<std::string> lines;
    for (std::string line; std::getline(md, line);) lines.push_back(line);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "| Model | Seizure | TumorArea | HealthArea | EyesClosed | EyesOpen | Overall Accuracy |");
    CHECK(lines[2].starts_with("| Naive Bayes | 0.600 |"));
    CHECK(lines[7] == "| GBDT | **1.000** | 1.000 | 1.000 | 1.000 | 1.000 | **1.000** |");
    CHECK(lines[10].starts_with("| LSTM |"));
    CHECK(t.csv.find("GBDT,1.000,1.000,1.000,1.000,1.000,1.000,best_seizure_precision;best_accuracy\n") !=
          std::string::npos);
  }
  SUBCASE("single model: one row carrying both flags") {
    const TableOutput t = emit_table1({full[3]});
    CHECK(t.warnings.empty());
    std::istringstream md(t.markdown);
    int rows = 0;
    for (std::string line; std::getline(md, line);) rows += line.starts_with("| KNN |");
    CHECK(rows == 1);
    CHECK(std::count(t.markdown.begin(), t.markdown.end(), '\n') == 3);
    CHECK(t.markdown.find("**0.600**") != std::string::npos);
    CHECK(t.csv.find("best_seizure_precision;best_accuracy") != std::string::npos);
  }
  SUBCASE("missing rows are blank with warnings") {
    const TableOutput t = emit_table1({full[0], full[5]});
    CHECK(t.warnings.size() == 7);
    CHECK(t.markdown.find("| Random Forest |  |  |  |  |  |  |") != std::string::npos);
    CHECK(t.csv.find("Random Forest,,,,,,,\n") != std::string::npos);
  }
}

TEST_CASE("emit_fig3_data") {
  std::vector<MetricsReport> bin;
  for (ModelKind m : kAllModels) bin.push_back(fake_report(m, TaskKind::Binary, 0.8));
  const std::string csv = emit_fig3_data(bin);
  std::istringstream in(csv);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 10);
  CHECK(lines[0] == "model,accuracy,auc,note");
  CHECK(lines[6].starts_with("GBDT,0.800,"));
  CHECK(lines[6].ends_with(",above 0.5"));
  CHECK(emit_fig3_data({}) == "model,accuracy,auc,note\n");

  const MetricsReport weak = fake_report(ModelKind::Nb, TaskKind::Binary, 0.3);
  CHECK(emit_fig3_data({weak}).find("not above 0.5") != std::string::npos);
}

TEST_CASE("summarize_seeds") {
  std::vector<RunResult> runs;
  for (std::uint64_t seed : {1, 2, 3}) {
    RunResult r;
    r.config.model = ModelKind::Gbdt;
    r.config.task = TaskKind::Binary;
    r.config.seed = seed;
    MetricsReport m = fake_report(ModelKind::Gbdt, TaskKind::Binary, 0.8);
    m.accuracy = 0.9 + 0.01 * static_cast<double>(seed);
    m.seed = seed;
    r.metrics = m;
    runs.push_back(r);
  }
  const json s = summarize_seeds(runs);
  REQUIRE(s.size() == 1);
  CHECK(s[0].at("accuracy").at("mean").get<double>() == doctest::Approx(0.92));
  CHECK(s[0].at("accuracy").at("sd").get<double>() == doctest::Approx(0.01));
  CHECK(s[0].at("seeds") == json({1, 2, 3}));
}
