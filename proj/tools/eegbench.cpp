// eegbench: command-line front end for the seizure-recognition benchmark.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eegbench/checks.hpp"
#include "eegbench/data_ingest.hpp"
#include "eegbench/errors.hpp"
#include "eegbench/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eegbench;

namespace {

struct RunFlags {
  std::string config;
  std::string data;
  std::string model;
  std::string task;
  std::string params;
  std::string out;
  std::vector<std::uint64_t> seeds;
  bool fast = false;
  bool quiet = false;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

// Defaults, then the config file, then flags.
json merged_config(const RunFlags& f, std::uint64_t seed) {
  json j = {{"out", "out"}};
  if (!f.config.empty()) j.update(read_json(f.config));
  if (!f.data.empty()) j["data"] = f.data;
  if (!f.model.empty()) j["model"] = f.model;
  if (!f.task.empty()) j["task"] = f.task;
  if (!f.out.empty()) j["out"] = f.out;
  if (f.fast) j["fast"] = true;
  if (!f.params.empty()) {
    try {
      j["params"] = json::parse(f.params);
    } catch (const json::parse_error& ex) {
      throw ConfigError(std::string("--params is not valid JSON: ") + ex.what());
    }
  }
  if (!f.seeds.empty()) j["seed"] = seed;
  return j;
}

std::vector<std::uint64_t> seeds_for(const RunFlags& f) {
  if (!f.seeds.empty()) return f.seeds;
  if (!f.config.empty()) {
    const json j = read_json(f.config);
    if (j.contains("seed") && j["seed"].is_number_unsigned()) return {j["seed"].get<std::uint64_t>()};
  }
  throw ConfigError("no seed given; pass --seed N or --seeds a,b,c, or set \"seed\" in the config");
}

LogFn make_log(bool quiet) {
  if (quiet) return {};
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

json summary_line(const RunResult& r) {
  json j = {{"task", task_name(r.config.task)},
            {"model", model_name(r.config.model)},
            {"seed", r.config.seed.value_or(0)},
            {"status", r.status}};
  if (r.metrics) {
    j["accuracy"] = r.metrics->accuracy;
    if (r.metrics->auc) j["auc"] = *r.metrics->auc;
  }
  if (r.artifacts.count("result")) j["result"] = r.artifacts.at("result").string();
  return j;
}

int cmd_run(const RunFlags& f) {
  const auto seeds = seeds_for(f);
  std::vector<RunResult> results;
  json lines = json::array();
  for (auto seed : seeds) {
    ExperimentConfig c = config_from_json(merged_config(f, seed));
    if (seeds.size() > 1) c.out_dir /= "seed-" + std::to_string(seed);
    results.push_back(run_experiment(c, make_log(f.quiet)));
    lines.push_back(summary_line(results.back()));
  }
  json out = {{"runs", lines}};
  if (seeds.size() > 1) {
    const json summary = summarize_seeds(results);
    const fs::path base = config_from_json(merged_config(f, seeds.front())).out_dir;
    write_json(base / "seeds_summary.json", summary);
    out["summary"] = summary;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_suite(const RunFlags& f, const std::string& models, const std::string& tasks) {
  std::vector<ModelKind> model_list(kAllModels.begin(), kAllModels.end());
  std::vector<TaskKind> task_list = {TaskKind::Binary, TaskKind::MultiClass};
  if (!models.empty()) {
    model_list.clear();
    std::stringstream in(models);
    for (std::string m; std::getline(in, m, ',');) model_list.push_back(parse_model(m));
  }
  if (!tasks.empty()) {
    task_list.clear();
    std::stringstream in(tasks);
    for (std::string t; std::getline(in, t, ',');) task_list.push_back(parse_task(t));
  }
  const auto seeds = seeds_for(f);
  std::vector<RunResult> all;
  json lines = json::array();
  for (auto seed : seeds) {
    json j = merged_config(f, seed);
    j.erase("model");
    j.erase("task");
    ExperimentConfig c = config_from_json(j);
    if (seeds.size() > 1) c.out_dir /= "seed-" + std::to_string(seed);
    for (auto& r : run_suite(c, model_list, task_list, make_log(f.quiet))) {
      lines.push_back(summary_line(r));
      all.push_back(std::move(r));
    }
  }
  json out = {{"runs", lines}};
  if (seeds.size() > 1) {
    const json summary = summarize_seeds(all);
    write_json(config_from_json(merged_config(f, seeds.front())).out_dir / "seeds_summary.json", summary);
    out["summary"] = summary;
  }
  std::cout << out.dump(2) << '\n';
  bool any_failed = false;
  for (const auto& r : all) any_failed = any_failed || r.status != "complete";
  return any_failed ? 3 : 0;
}

int cmd_report(const std::string& dir, bool quiet) {
  const TableOutput t = emit_reports(dir, make_log(quiet));
  for (const auto& w : t.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << t.markdown;
  return 0;
}

int cmd_demo(const std::string& data, std::uint64_t seed, const std::string& out) {
  const EegDataset ds = load_csv(data);
  const auto picks = sample_per_class(ds, seed);
  export_waveform_csv(picks, out);
  json j = {{"out", out}, {"records", json::array()}};
  for (const auto& r : picks) j["records"].push_back({{"id", r.id}, {"label", label_name(r.label)}});
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_check(std::uint64_t seed, const std::vector<std::string>& only) {
  bool all_passed = true;
  for (const auto& c : checks::property_checks()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto r = c.run(seed);
    all_passed = all_passed && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  }
  return all_passed ? 0 : 1;
}

int cmd_synth(std::size_t per_class, std::uint64_t seed, const std::string& out) {
  write_csv(checks::synthetic_dataset(per_class, seed), out);
  std::cout << json({{"out", out}, {"records", per_class * kAllLabels.size()}}).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG seizure-recognition benchmark: classical and neural classifiers on 178-sample recordings"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::uint64_t single_seed = 0;
  std::string seed_list;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", run_flags.config, "JSON config file");
    sub->add_option("--data", run_flags.data, "Dataset CSV");
    sub->add_option("--seed", single_seed, "Seed");
    sub->add_option("--seeds", seed_list, "Comma-separated seeds; results go to <out>/seed-N");
    sub->add_option("--out", run_flags.out, "Output directory");
    sub->add_flag("--fast", run_flags.fast, "Subsample records, epochs and trees for a quick run");
    sub->add_flag("--quiet", run_flags.quiet, "No progress lines on stderr");
  };

  auto* run = app.add_subcommand("run", "Tune, fit and evaluate one model on one task");
  add_run_flags(run);
  run->add_option("--model", run_flags.model, "nb|logreg|linsvm|knn|rf|gbdt|cnn|gru|lstm");
  run->add_option("--task", run_flags.task, "binary|multiclass");
  run->add_option("--params", run_flags.params, "JSON object of hyperparameter overrides");

  auto* suite = app.add_subcommand("suite", "All models on both tasks with shared splits");
  add_run_flags(suite);
  std::string suite_models, suite_tasks;
  suite->add_option("--models", suite_models, "Comma-separated subset of models");
  suite->add_option("--tasks", suite_tasks, "Comma-separated subset of tasks");

  auto* report = app.add_subcommand("report", "Rewrite table1.md/.csv and fig3.csv from stored results");
  std::string report_dir;
  bool report_quiet = false;
  report->add_option("--in", report_dir, "Results directory")->required();
  report->add_flag("--quiet", report_quiet, "No progress lines on stderr");

  auto* demo = app.add_subcommand("demo", "Export one random waveform per class as CSV");
  std::string demo_data, demo_out = "waveforms.csv";
  std::uint64_t demo_seed = 0;
  demo->add_option("--data", demo_data, "Dataset CSV")->required();
  demo->add_option("--seed", demo_seed, "Seed")->required();
  demo->add_option("--out", demo_out, "Output CSV");

  auto* check = app.add_subcommand("check", "Run the oracle and property suites");
  std::uint64_t check_seed = 20240101;
  std::vector<std::string> check_only;
  check->add_option("--seed", check_seed, "Seed for the random fixtures");
  check->add_option("--only", check_only, "Run only the named checks");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset in the input CSV layout");
  std::size_t synth_per_class = 100;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth->add_option("--per-class", synth_per_class, "Records per class");
  synth->add_option("--seed", synth_seed, "Seed");
  synth->add_option("--out", synth_out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || suite->parsed()) {
      CLI::App* sub = run->parsed() ? run : suite;
      if (!seed_list.empty()) run_flags.seeds = parse_seed_list(seed_list);
      else if (sub->count("--seed")) run_flags.seeds = {single_seed};
      return run->parsed() ? cmd_run(run_flags) : cmd_suite(run_flags, suite_models, suite_tasks);
    }
    if (report->parsed()) return cmd_report(report_dir, report_quiet);
    if (demo->parsed()) return cmd_demo(demo_data, demo_seed, demo_out);
    if (check->parsed()) return cmd_check(check_seed, check_only);
    if (synth->parsed()) return cmd_synth(synth_per_class, synth_seed, synth_out);
  } catch (const Error& e) {
    std::cerr << json({{"error", {{"kind", e.kind()}, {"message", e.what()}}}}).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json({{"error", {{"kind", "internal"}, {"message", e.what()}}}}).dump() << '\n';
    return 1;
  }
  return 0;
}
