#include "eegbench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "eegbench/classical/classifier.hpp"
#include "eegbench/classical/grid_search.hpp"
#include "eegbench/errors.hpp"
#include "eegbench/neural/network.hpp"
#include "eegbench/neural/trainer.hpp"

namespace eegbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Sub-seed slots under the run seed.
enum SeedSlot : std::uint64_t { kSubsample, kOuterSplit, kFolds, kGrid, kRefit, kValidation, kInit, kTrain };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json default_grid(ModelKind m) {
  switch (m) {
    case ModelKind::Nb: return json::object();
    case ModelKind::Logreg:
    case ModelKind::Linsvm: return {{"step_size", {1.0, 0.1, 0.01}}, {"l2_lambda", 1e-4}};
    case ModelKind::Knn: return {{"k", {1, 3, 5, 7, 11}}};
    case ModelKind::Rf: return {{"n_estimators", {100, 200}}, {"max_depth", {10, 20, nullptr}}};
    case ModelKind::Gbdt: return {{"learning_rate", 0.1}, {"n_rounds", 100}, {"max_depth", {3, 5}}};
    default: return json::object();
  }
}

// Caps every value of a numeric axis at `cap`.
void cap_axis(json& axes, const char* key, int cap) {
  if (!axes.contains(key)) return;
  json& axis = axes[key];
  if (axis.is_array()) {
    json capped = json::array();
    for (const auto& v : axis) {
      const json c = v.is_number() ? json(std::min(v.get<int>(), cap)) : v;
      if (std::find(capped.begin(), capped.end(), c) == capped.end()) capped.push_back(c);
    }
    axis = capped;
  } else if (axis.is_number()) {
    axis = std::min(axis.get<int>(), cap);
  }
}

struct DeepParams {
  int max_epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  int patience = 10;
  std::optional<std::size_t> k1, k2;
  int tune_epochs = 15;
};

DeepParams parse_deep_params(ModelKind m, const json& p, bool fast) {
  static const std::set<std::string> common = {"max_epochs", "batch_size", "learning_rate", "patience"};
  static const std::set<std::string> cnn_only = {"k1", "k2", "tune_epochs"};
  for (const auto& [key, value] : p.items())
    if (!common.contains(key) && !(m == ModelKind::Cnn && cnn_only.contains(key)))
      throw ConfigError("unknown parameter '" + key + "' for model " + std::string(model_name(m)));
  DeepParams d;
  try {
    d.max_epochs = p.value("max_epochs", d.max_epochs);
    d.batch_size = p.value("batch_size", d.batch_size);
    d.learning_rate = p.value("learning_rate", d.learning_rate);
    d.patience = p.value("patience", d.patience);
    d.tune_epochs = p.value("tune_epochs", d.tune_epochs);
    if (p.contains("k1")) d.k1 = p.at("k1").get<std::size_t>();
    if (p.contains("k2")) d.k2 = p.at("k2").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad network parameter: ") + ex.what());
  }
  if (fast) {
    d.max_epochs = std::min(d.max_epochs, kFastModeEpochs);
    d.tune_epochs = std::min(d.tune_epochs, 3);
  }
  return d;
}

json deep_params_json(const DeepParams& d, std::size_t k1, std::size_t k2, ModelKind m) {
  json j = {{"max_epochs", d.max_epochs},
            {"batch_size", d.batch_size},
            {"learning_rate", d.learning_rate},
            {"patience", d.patience}};
  if (m == ModelKind::Cnn) {
    j["k1"] = k1;
    j["k2"] = k2;
    j["dense_widths"] = {nn::kCnnDenseWidths[0], nn::kCnnDenseWidths[1], nn::kCnnDenseWidths[2]};
  } else {
    j["hidden"] = nn::kRnnHidden;
    j["head_width"] = nn::kRnnHeadWidth;
    j["dropout"] = nn::kRnnDropout;
  }
  return j;
}

nn::Network build_network(ModelKind m, int classes, std::size_t k1, std::size_t k2) {
  if (m == ModelKind::Cnn) return nn::build_cnn(classes, k1, k2);
  return nn::build_rnn(m == ModelKind::Gru ? nn::CellKind::Gru : nn::CellKind::Lstm, classes);
}

fs::path run_dir(const ExperimentConfig& c) { return c.out_dir / task_name(c.task) / model_name(c.model); }

MetricsReport evaluate(const std::string& id, const PreparedData& data, const std::vector<ProbPrediction>& probs,
                       const std::vector<int>& predicted) {
  const LabeledData test = data.scaled.subset(data.split.test_indices);
  std::vector<double> positive;
  if (data.task == TaskKind::Binary)
    for (const auto& p : probs) positive.push_back(p.scores.at(1));
  return make_report(id, data.task, data.seed, predicted, test.labels, positive);
}

json split_manifest(const PreparedData& data) {
  return {{"task", task_name(data.task)},
          {"seed", data.seed},
          {"source_rows", data.source_rows},
          {"split", data.split},
          {"scaler", data.scaler}};
}

}  // namespace

std::string_view model_name(ModelKind m) noexcept {
  switch (m) {
    case ModelKind::Nb: return "nb";
    case ModelKind::Logreg: return "logreg";
    case ModelKind::Linsvm: return "linsvm";
    case ModelKind::Knn: return "knn";
    case ModelKind::Rf: return "rf";
    case ModelKind::Gbdt: return "gbdt";
    case ModelKind::Cnn: return "cnn";
    case ModelKind::Gru: return "gru";
    case ModelKind::Lstm: return "lstm";
  }
  return "";
}

std::string_view model_display_name(ModelKind m) noexcept {
  switch (m) {
    case ModelKind::Nb: return "Naive Bayes";
    case ModelKind::Logreg: return "Logistic Regression";
    case ModelKind::Linsvm: return "Linear SVM";
    case ModelKind::Knn: return "KNN";
    case ModelKind::Rf: return "Random Forest";
    case ModelKind::Gbdt: return "GBDT";
    case ModelKind::Cnn: return "CNN";
    case ModelKind::Gru: return "GRU";
    case ModelKind::Lstm: return "LSTM";
  }
  return "";
}

ModelKind parse_model(std::string_view name) {
  for (ModelKind m : kAllModels)
    if (model_name(m) == name) return m;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected nb|logreg|linsvm|knn|rf|gbdt|cnn|gru|lstm)");
}

bool is_deep(ModelKind m) noexcept { return m == ModelKind::Cnn || m == ModelKind::Gru || m == ModelKind::Lstm; }

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> known = {"data", "task", "model", "params", "seed", "fast", "out", "cv_folds"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  ExperimentConfig c;
  try {
    if (j.contains("data")) c.data_path = j.at("data").get<std::string>();
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("fast")) c.fast_mode = j.at("fast").get<bool>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("cv_folds")) c.cv_folds = j.at("cv_folds").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad config value: ") + ex.what());
  }
  if (!c.params.is_object()) throw ConfigError("config 'params' must be an object");
  if (!c.seed) throw ConfigError("config has no seed; unseeded runs are not allowed");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"data", c.data_path.string()},
          {"task", task_name(c.task)},
          {"model", model_name(c.model)},
          {"params", c.params},
          {"seed", c.seed ? json(*c.seed) : json(nullptr)},
          {"fast", c.fast_mode},
          {"out", c.out_dir.string()},
          {"cv_folds", c.cv_folds}};
}

PreparedData prepare(const EegDataset& ds, TaskKind task, std::uint64_t seed, bool fast_mode, double test_ratio) {
  PreparedData p;
  p.task = task;
  p.seed = seed;
  LabeledData all = relabel(ds, task);
  p.source_rows.resize(all.rows);
  for (std::size_t i = 0; i < all.rows; ++i) p.source_rows[i] = i;
  if (fast_mode && all.rows > kFastModeRecords) {
    const double keep = static_cast<double>(kFastModeRecords) / static_cast<double>(all.rows);
    p.source_rows = stratified_split(all.labels, keep, derive_seed(seed, kSubsample)).train_indices;
    all = all.subset(p.source_rows);
  }
  p.split = stratified_split(all.labels, 1.0 - test_ratio, derive_seed(seed, kOuterSplit));
  p.scaler = fit_minmax(all.subset(p.split.train_indices));
  p.scaled = apply_minmax(p.scaler, std::move(all));
  return p;
}

RunResult run_experiment(const ExperimentConfig& config, const LogFn& log) {
  if (!config.seed) throw ConfigError("config has no seed; unseeded runs are not allowed");
  const auto start = Clock::now();
  std::optional<PreparedData> data;
  double load = 0.0, prep = 0.0;
  try {
    const EegDataset ds = load_csv(config.data_path);
    load = seconds_since(start);
    const auto t = Clock::now();
    data = prepare(ds, config.task, *config.seed, config.fast_mode, config.test_ratio);
    prep = seconds_since(t);
  } catch (const Error& e) {
    // Failed before any model work; leave a marker for the run directory.
    RunResult failed;
    failed.config = config;
    failed.status = "failed";
    failed.error_kind = e.kind();
    failed.error_message = e.what();
    failed.timings.total = seconds_since(start);
    const fs::path dir = run_dir(config);
    fs::create_directories(dir);
    write_json(dir / "result.json", result_to_json(failed));
    throw;
  }
  return run_prepared(config, *data, load, prep, log);
}

RunResult run_prepared(const ExperimentConfig& config, const PreparedData& data, double load_seconds,
                       double preprocess_seconds, const LogFn& log) {
  const auto start = Clock::now();
  const auto say = [&](const std::string& s) {
    if (log) log(std::string(task_name(config.task)) + "/" + std::string(model_name(config.model)) + ": " + s);
  };
  RunResult r;
  r.config = config;
  r.config.seed = data.seed;
  r.timings.load = load_seconds;
  r.timings.preprocess = preprocess_seconds;
  const fs::path dir = run_dir(config);
  fs::create_directories(dir);
  for (const char* stale : {"metrics.json", "model.json", "history.csv", "grid.json", "result.json"})
    fs::remove(dir / stale);
  r.artifacts["result"] = dir / "result.json";

  try {
    const std::uint64_t seed = data.seed;
    const std::string id(model_name(config.model));
    json manifest = split_manifest(data);
    const LabeledData train = data.scaled.subset(data.split.train_indices);
    const LabeledData test = data.scaled.subset(data.split.test_indices);
    const int classes = num_classes(config.task);
    const ClassWeights weights =
        config.task == TaskKind::Binary ? class_weights(train.labels, classes) : ClassWeights::uniform(classes);
    std::vector<ProbPrediction> probs;
    std::vector<int> predicted;
    json model_artifact;

    if (!is_deep(config.model)) {
      json axes = default_grid(config.model);
      for (const auto& [key, value] : config.params.items()) axes[key] = value;
      if (config.fast_mode) {
        cap_axis(axes, "n_estimators", kFastModeTrees);
        cap_axis(axes, "n_rounds", kFastModeTrees);
      }
      const auto grid = expand_grid(axes);
      make_classifier(id, grid.front());  // reject bad keys before any fitting

      auto t = Clock::now();
      Params best = grid.front();
      if (grid.size() > 1) {
        const FoldPlan folds =
            kfold_stratified(data.split.train_indices, data.scaled.labels, config.cv_folds, derive_seed(seed, kFolds));
        manifest["cv_folds"] = folds;
        const auto factory = [&](const Params& p) { return make_classifier(id, p); };
        const GridResult g = grid_search(factory, grid, data.scaled, folds, SelectionMetric::Accuracy,
                                         config.task == TaskKind::Binary, derive_seed(seed, kGrid));
        for (const auto& cell : g.cells)
          say("cv " + cell.params.dump() + " -> " + (cell.failure ? "failed: " + *cell.failure : format_double(cell.mean_score)));
        best = g.best_params;
        r.tuning = g;
        write_json(dir / "grid.json", r.tuning);
        r.artifacts["grid"] = dir / "grid.json";
      }
      r.timings.tune = seconds_since(t);
      r.chosen_params = best;

      t = Clock::now();
      auto clf = make_classifier(id, best);
      clf->fit(train, weights, derive_seed(seed, kRefit));
      r.timings.fit = seconds_since(t);

      t = Clock::now();
      for (std::size_t i = 0; i < test.rows; ++i) {
        probs.push_back(clf->predict_proba(test.row(i)));
        predicted.push_back(clf->predict_label(test.row(i)));
      }
      r.metrics = evaluate(id, data, probs, predicted);
      r.timings.evaluate = seconds_since(t);
      model_artifact = {{"classifier", clf->to_json()}};
    } else {
      DeepParams dp = parse_deep_params(config.model, config.params, config.fast_mode);
      // Inner validation split over the outer training rows.
      const SplitPlan inner = stratified_split(train.labels, 0.8, derive_seed(seed, kValidation));
      SplitPlan validation{{}, {}, inner.seed, inner.ratio};
      for (auto i : inner.train_indices) validation.train_indices.push_back(data.split.train_indices[i]);
      for (auto i : inner.test_indices) validation.test_indices.push_back(data.split.train_indices[i]);
      manifest["validation"] = validation;

      nn::TrainConfig tc{dp.batch_size, dp.max_epochs, dp.learning_rate, dp.patience, derive_seed(seed, kTrain)};
      std::size_t k1 = dp.k1.value_or(7), k2 = dp.k2.value_or(5);

      auto t = Clock::now();
      if (config.model == ModelKind::Cnn && !(dp.k1 && dp.k2) && dp.tune_epochs > 0) {
        json search = json::array();
        double best_acc = -1.0;
        const std::vector<std::size_t> k1s = dp.k1 ? std::vector<std::size_t>{*dp.k1} : std::vector<std::size_t>{3, 5, 7};
        const std::vector<std::size_t> k2s = dp.k2 ? std::vector<std::size_t>{*dp.k2} : std::vector<std::size_t>{3, 5, 7};
        for (auto a : k1s) {
          for (auto b : k2s) {
            nn::Network net = build_network(config.model, classes, a, b);
            net.initialize(derive_seed(seed, kInit));
            nn::TrainConfig short_tc = tc;
            short_tc.max_epochs = dp.tune_epochs;
            const auto res = nn::train(net, data.scaled, validation, short_tc, weights);
            search.push_back({{"k1", a}, {"k2", b}, {"val_accuracy", res.best_val_accuracy}, {"epochs", res.history.size()}});
            say("kernels " + std::to_string(a) + "," + std::to_string(b) + " -> " + format_double(res.best_val_accuracy));
            if (res.best_val_accuracy > best_acc) {
              best_acc = res.best_val_accuracy;
              k1 = a;
              k2 = b;
            }
          }
        }
        r.tuning = {{"kernel_search", search}, {"tune_epochs", dp.tune_epochs}};
      }
      r.timings.tune = seconds_since(t);
      r.chosen_params = deep_params_json(dp, k1, k2, config.model);

      t = Clock::now();
      nn::Network net = build_network(config.model, classes, k1, k2);
      net.initialize(derive_seed(seed, kInit));
      const auto res = nn::train(net, data.scaled, validation, tc, weights, [&](const nn::EpochRecord& e) {
        say("epoch " + std::to_string(e.epoch) + " loss " + format_double(e.train_loss) + " val_acc " +
            format_double(e.val_accuracy));
      });
      r.timings.fit = seconds_since(t);
      r.chosen_params["best_epoch"] = res.best_epoch;
      r.chosen_params["epochs_run"] = res.history.size();
      nn::write_history_csv(res.history, dir / "history.csv");
      r.artifacts["history"] = dir / "history.csv";

      t = Clock::now();
      probs = nn::predict_proba(net, test);
      for (const auto& p : probs) predicted.push_back(argmax_label(p));
      r.metrics = evaluate(id, data, probs, predicted);
      r.timings.evaluate = seconds_since(t);
      model_artifact = {{"network", net.to_json()}};
    }

    model_artifact["model"] = id;
    model_artifact["task"] = task_name(config.task);
    model_artifact["class_names"] = class_names(config.task);
    model_artifact["scaler"] = data.scaler;
    model_artifact["seed"] = seed;
    write_json(dir / "model.json", model_artifact);
    write_json(dir / "split_manifest.json", manifest);
    write_json(dir / "metrics.json", *r.metrics);
    r.artifacts["model"] = dir / "model.json";
    r.artifacts["split_manifest"] = dir / "split_manifest.json";
    r.artifacts["metrics"] = dir / "metrics.json";
    r.timings.total = load_seconds + preprocess_seconds + seconds_since(start);
    write_json(dir / "result.json", result_to_json(r));
    say("accuracy " + format_double(r.metrics->accuracy) + (r.metrics->auc ? " auc " + format_double(*r.metrics->auc) : ""));
    return r;
  } catch (const std::exception& e) {
    const auto* known = dynamic_cast<const Error*>(&e);
    r.status = "failed";
    r.error_kind = known ? known->kind() : "internal";
    r.error_message = e.what();
    r.metrics.reset();
    r.timings.total = load_seconds + preprocess_seconds + seconds_since(start);
    for (const char* partial : {"metrics.json", "model.json"}) fs::remove(dir / partial);
    r.artifacts.erase("metrics");
    r.artifacts.erase("model");
    write_json(dir / "result.json", result_to_json(r));
    throw;
  }
}

std::vector<RunResult> run_suite(const ExperimentConfig& base, const std::vector<ModelKind>& models,
                                 const std::vector<TaskKind>& tasks, const LogFn& log) {
  if (!base.seed) throw ConfigError("suite has no seed; unseeded runs are not allowed");
  const auto start = Clock::now();
  const EegDataset ds = load_csv(base.data_path);
  const double load = seconds_since(start);
  std::vector<RunResult> results;
  for (TaskKind task : tasks) {
    // One split per task, shared by every model.
    const auto t = Clock::now();
    const PreparedData data = prepare(ds, task, *base.seed, base.fast_mode, base.test_ratio);
    const double prep = seconds_since(t);
    for (ModelKind m : models) {
      ExperimentConfig c = base;
      c.task = task;
      c.model = m;
      c.params = base.params.contains(std::string(model_name(m))) ? base.params.at(std::string(model_name(m)))
                                                                  : json::object();
      try {
        results.push_back(run_prepared(c, data, load, prep, log));
      } catch (const std::exception& e) {
        if (log) log(std::string(task_name(task)) + "/" + std::string(model_name(m)) + " failed: " + e.what());
        results.push_back(result_from_json(read_json(run_dir(c) / "result.json")));
      }
    }
  }
  std::vector<MetricsReport> multi, binary;
  json summary = json::array();
  for (const auto& r : results) {
    summary.push_back({{"task", task_name(r.config.task)},
                       {"model", model_name(r.config.model)},
                       {"status", r.status},
                       {"result", r.artifacts.count("result") ? r.artifacts.at("result").string() : ""}});
    if (!r.metrics) continue;
    (r.config.task == TaskKind::Binary ? binary : multi).push_back(*r.metrics);
  }
  const TableOutput table = emit_table1(multi);
  for (const auto& w : table.warnings)
    if (log) log("table1: " + w);
  fs::create_directories(base.out_dir);
  write_text(base.out_dir / "table1.md", table.markdown);
  write_text(base.out_dir / "table1.csv", table.csv);
  write_text(base.out_dir / "fig3.csv", emit_fig3_data(binary));
  write_json(base.out_dir / "suite.json", {{"seed", *base.seed}, {"runs", summary}});
  return results;
}

MetricsReport recompute_metrics(const fs::path& dir, const EegDataset& ds) {
  const json manifest = read_json(dir / "split_manifest.json");
  const json model = read_json(dir / "model.json");
  try {
    const TaskKind task = parse_task(manifest.at("task").get<std::string>());
    const auto seed = manifest.at("seed").get<std::uint64_t>();
    const auto rows = manifest.at("source_rows").get<std::vector<std::size_t>>();
    const auto split = manifest.at("split").get<SplitPlan>();
    const auto scaler = model.at("scaler").get<ScalerParams>();
    for (auto i : rows)
      if (i >= ds.size()) throw ConfigError("split manifest refers to row " + std::to_string(i) + " beyond the dataset");
    const LabeledData test = apply_minmax(scaler, relabel(ds, task).subset(rows).subset(split.test_indices));
    const std::string id = model.at("model").get<std::string>();
    std::vector<int> predicted;
    std::vector<double> positive;
    if (model.contains("classifier")) {
      const auto clf = load_classifier(model.at("classifier"));
      for (std::size_t i = 0; i < test.rows; ++i) {
        predicted.push_back(clf->predict_label(test.row(i)));
        if (task == TaskKind::Binary) positive.push_back(clf->predict_proba(test.row(i)).scores.at(1));
      }
    } else {
      nn::Network net = nn::Network::from_json(model.at("network"));
      for (const auto& p : nn::predict_proba(net, test)) {
        predicted.push_back(argmax_label(p));
        if (task == TaskKind::Binary) positive.push_back(p.scores.at(1));
      }
    }
    return make_report(id, task, seed, predicted, test.labels, positive);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed run artifacts in ") + dir.string() + ": " + ex.what());
  }
}

TableOutput emit_table1(const std::vector<MetricsReport>& multiclass) {
  TableOutput out;
  const auto names = class_names(TaskKind::MultiClass);
  std::vector<const MetricsReport*> rows;
  for (ModelKind m : kAllModels) {
    const MetricsReport* found = nullptr;
    for (const auto& r : multiclass) {
      if (r.model_id != model_name(m)) continue;
      if (found) {
        out.warnings.push_back("duplicate result for " + r.model_id + "; using the first");
        continue;
      }
      found = &r;
    }
    if (!found && multiclass.size() > 1) out.warnings.push_back("no multiclass result for " + std::string(model_name(m)));
    rows.push_back(found);
  }
  for (const auto& r : multiclass)
    if (r.task != TaskKind::MultiClass) out.warnings.push_back("ignoring non-multiclass result for " + r.model_id);

  double best_seizure = -1.0, best_acc = -1.0;
  for (const auto* r : rows) {
    if (!r || r->task != TaskKind::MultiClass) continue;
    best_seizure = std::max(best_seizure, r->precision.precision.at(0));
    best_acc = std::max(best_acc, r->accuracy);
  }

  std::ostringstream md, csv;
  md << "| Model |";
  csv << "model";
  for (const auto& n : names) {
    md << ' ' << n << " |";
    csv << ',' << n;
  }
  md << " Overall Accuracy |\n|---|";
  csv << ",Overall Accuracy,flags\n";
  for (std::size_t i = 0; i <= names.size(); ++i) md << "---|";
  md << '\n';

  for (std::size_t i = 0; i < kAllModels.size(); ++i) {
    const auto* r = rows[i];
    // A lone result is a one-row table; otherwise absent models keep a blank row.
    if (multiclass.size() <= 1 && !r) continue;
    const std::string label(model_display_name(kAllModels[i]));
    md << "| " << label << " |";
    csv << label;
    if (!r || r->task != TaskKind::MultiClass) {
      for (std::size_t c = 0; c <= names.size(); ++c) {
        md << "  |";
        csv << ',';
      }
      md << '\n';
      csv << ",\n";
      continue;
    }
    const auto cells = table_cells(*r);
    const bool flag_seizure = r->precision.precision.at(0) == best_seizure;
    const bool flag_acc = r->accuracy == best_acc;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const bool bold = (c == 0 && flag_seizure) || (c + 1 == cells.size() && flag_acc);
      md << ' ' << (bold ? "**" + cells[c] + "**" : cells[c]) << " |";
      csv << ',' << cells[c];
    }
    std::string flags;
    if (flag_seizure) flags = "best_seizure_precision";
    if (flag_acc) flags += (flags.empty() ? "" : ";") + std::string("best_accuracy");
    md << '\n';
    csv << ',' << flags << '\n';
  }
  out.markdown = md.str();
  out.csv = csv.str();
  return out;
}

std::string emit_fig3_data(const std::vector<MetricsReport>& binary) {
  std::ostringstream csv;
  csv << "model,accuracy,auc,note\n";
  char buf[32];
  for (ModelKind m : kAllModels) {
    for (const auto& r : binary) {
      if (r.model_id != model_name(m) || r.task != TaskKind::Binary) continue;
      std::snprintf(buf, sizeof buf, "%.3f", r.accuracy);
      csv << model_display_name(m) << ',' << buf << ',';
      if (r.auc) {
        std::snprintf(buf, sizeof buf, "%.3f", *r.auc);
        csv << buf;
      }
      const bool above = r.accuracy > 0.5 && r.auc && *r.auc > 0.5;
      csv << ',' << (above ? "above 0.5" : "not above 0.5") << '\n';
      break;
    }
  }
  return csv.str();
}

TableOutput emit_reports(const fs::path& dir, const LogFn& log) {
  if (!fs::is_directory(dir)) throw IoError("no such results directory: " + dir.string());
  std::vector<MetricsReport> multi, binary;
  for (TaskKind task : {TaskKind::Binary, TaskKind::MultiClass}) {
    for (ModelKind m : kAllModels) {
      const fs::path file = dir / task_name(task) / model_name(m) / "result.json";
      if (!fs::exists(file)) continue;
      const RunResult r = result_from_json(read_json(file));
      if (!r.metrics) {
        if (log) log("skipping " + file.string() + " (status " + r.status + ")");
        continue;
      }
      (task == TaskKind::Binary ? binary : multi).push_back(*r.metrics);
    }
  }
  TableOutput table = emit_table1(multi);
  write_text(dir / "table1.md", table.markdown);
  write_text(dir / "table1.csv", table.csv);
  write_text(dir / "fig3.csv", emit_fig3_data(binary));
  return table;
}

json summarize_seeds(const std::vector<RunResult>& results) {
  struct Acc {
    std::vector<double> accuracy, auc;
    std::vector<std::uint64_t> seeds;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  for (const auto& r : results) {
    if (!r.metrics) continue;
    auto& g = groups[{std::string(task_name(r.config.task)), std::string(model_name(r.config.model))}];
    g.accuracy.push_back(r.metrics->accuracy);
    if (r.metrics->auc) g.auc.push_back(*r.metrics->auc);
    g.seeds.push_back(r.metrics->seed);
  }
  const auto stats = [](const std::vector<double>& v) -> json {
    if (v.empty()) return nullptr;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return {{"mean", mean}, {"sd", sd}, {"values", v}};
  };
  json out = json::array();
  for (const auto& [key, g] : groups)
    out.push_back({{"task", key.first}, {"model", key.second}, {"seeds", g.seeds}, {"accuracy", stats(g.accuracy)},
                   {"auc", stats(g.auc)}});
  return out;
}

json result_to_json(const RunResult& r) {
  json artifacts = json::object();
  for (const auto& [k, v] : r.artifacts) artifacts[k] = v.string();
  json j = {{"config", config_to_json(r.config)},
            {"status", r.status},
            {"chosen_params", r.chosen_params},
            {"tuning", r.tuning},
            {"metrics", r.metrics ? json(*r.metrics) : json(nullptr)},
            {"timings",
             {{"load", r.timings.load},
              {"preprocess", r.timings.preprocess},
              {"tune", r.timings.tune},
              {"fit", r.timings.fit},
              {"evaluate", r.timings.evaluate},
              {"total", r.timings.total}}},
            {"artifacts", artifacts}};
  if (r.error_kind) j["error"] = {{"kind", *r.error_kind}, {"message", r.error_message.value_or("")}};
  return j;
}

RunResult result_from_json(const json& j) {
  try {
    RunResult r;
    r.config = config_from_json(j.at("config"));
    r.status = j.at("status").get<std::string>();
    r.chosen_params = j.at("chosen_params");
    r.tuning = j.at("tuning");
    if (!j.at("metrics").is_null()) r.metrics = j.at("metrics").get<MetricsReport>();
    const auto& t = j.at("timings");
    r.timings = {t.at("load").get<double>(),     t.at("preprocess").get<double>(), t.at("tune").get<double>(),
                 t.at("fit").get<double>(),      t.at("evaluate").get<double>(),   t.at("total").get<double>()};
    for (const auto& [k, v] : j.at("artifacts").items()) r.artifacts[k] = v.get<std::string>();
    if (j.contains("error")) {
      r.error_kind = j["error"].at("kind").get<std::string>();
      r.error_message = j["error"].at("message").get<std::string>();
    }
    return r;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed result file: ") + ex.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ParseError(path.string() + ": " + ex.what());
  }
}

}  // namespace eegbench
