#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eegbench/data_ingest.hpp"
#include "eegbench/metrics.hpp"
#include "eegbench/preprocess.hpp"

namespace eegbench {

enum class ModelKind { Nb, Logreg, Linsvm, Knn, Rf, Gbdt, Cnn, Gru, Lstm };

/// Table row order.
inline constexpr std::array<ModelKind, 9> kAllModels = {ModelKind::Nb,  ModelKind::Logreg, ModelKind::Linsvm,
                                                        ModelKind::Knn, ModelKind::Rf,     ModelKind::Gbdt,
                                                        ModelKind::Cnn, ModelKind::Gru,    ModelKind::Lstm};

std::string_view model_name(ModelKind m) noexcept;
/// Human-readable row label ("Naive Bayes", "Linear SVM", ...).
std::string_view model_display_name(ModelKind m) noexcept;
ModelKind parse_model(std::string_view name);
bool is_deep(ModelKind m) noexcept;

inline constexpr std::size_t kFastModeRecords = 500;
inline constexpr int kFastModeEpochs = 10;
inline constexpr int kFastModeTrees = 25;

struct ExperimentConfig {
  std::filesystem::path data_path;
  TaskKind task = TaskKind::Binary;
  ModelKind model = ModelKind::Nb;
  /// Classical: replaces grid axes (scalar or list). Deep: max_epochs,
  /// batch_size, learning_rate, patience, k1, k2, tune_epochs.
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  bool fast_mode = false;
  std::filesystem::path out_dir = "out";
  std::size_t cv_folds = 5;
  double test_ratio = 0.2;
};

/// Strict parse: unknown keys, bad kinds or a missing seed throw ConfigError.
/// Keys: data, task, model, params, seed, fast, out, cv_folds.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Dataset after relabeling, the outer split and scaling. Shared by every
/// model of a task so that all of them see the same test indices.
struct PreparedData {
  TaskKind task = TaskKind::Binary;
  std::uint64_t seed = 0;
  /// Row positions of the source file used (all rows unless fast mode).
  std::vector<std::size_t> source_rows;
  /// All used rows, scaled with train-only extremes. Split indices refer to it.
  LabeledData scaled;
  SplitPlan split;
  ScalerParams scaler;
};

PreparedData prepare(const EegDataset& ds, TaskKind task, std::uint64_t seed, bool fast_mode, double test_ratio = 0.2);

struct PhaseTimings {
  double load = 0.0;
  double preprocess = 0.0;
  double tune = 0.0;
  double fit = 0.0;
  double evaluate = 0.0;
  double total = 0.0;
};

struct RunResult {
  ExperimentConfig config;
  std::string status = "complete";  // or "failed"
  std::optional<std::string> error_kind;
  std::optional<std::string> error_message;
  nlohmann::json chosen_params = nlohmann::json::object();
  nlohmann::json tuning = nlohmann::json::object();
  std::optional<MetricsReport> metrics;
  PhaseTimings timings;
  std::map<std::string, std::filesystem::path> artifacts;
};

nlohmann::json result_to_json(const RunResult& r);
RunResult result_from_json(const nlohmann::json& j);

/// Progress lines (one per grid cell or epoch); may be empty.
using LogFn = std::function<void(const std::string&)>;

/// End to end: load, relabel, split, scale, tune and fit on train only,
/// evaluate once on the held-out test rows, write artifacts to
/// `<out>/<task>/<model>/`. Failures propagate after result.json is written
/// with status "failed".
RunResult run_experiment(const ExperimentConfig& config, const LogFn& log = {});
/// Same, reusing an already prepared split.
/// The load and preprocess times are carried into the result's timings.
RunResult run_prepared(const ExperimentConfig& config, const PreparedData& data, double load_seconds,
                       double preprocess_seconds, const LogFn& log = {});

/// All 9 models on both tasks (or `models`/`tasks` if given). Individual
/// failures are recorded and the suite continues. Writes table1.{md,csv},
/// fig3.csv and suite.json under `out_dir`.
std::vector<RunResult> run_suite(const ExperimentConfig& base, const std::vector<ModelKind>& models,
                                 const std::vector<TaskKind>& tasks, const LogFn& log = {});

/// Loads a run directory's model.json and split_manifest.json, re-predicts
/// the test rows and returns the recomputed report.
MetricsReport recompute_metrics(const std::filesystem::path& run_dir, const EegDataset& ds);

struct TableOutput {
  std::string markdown;
  std::string csv;
  std::vector<std::string> warnings;
};

/// Multiclass rows in table order. With two or more results, absent models
/// get blank cells and a warning; a single result gives a one-row table.
/// Best Seizure precision and best accuracy are bolded (Markdown) and marked
/// in the CSV `flags` column.
TableOutput emit_table1(const std::vector<MetricsReport>& multiclass);

/// Binary rows in table order: model,accuracy,auc,note. The note column reads
/// "above 0.5" when both values exceed 0.5.
std::string emit_fig3_data(const std::vector<MetricsReport>& binary);

/// Reads every `<dir>/<task>/<model>/result.json` and rewrites the tables.
TableOutput emit_reports(const std::filesystem::path& dir, const LogFn& log = {});

/// Mean and sample standard deviation of accuracy/AUC across seeds, per model.
nlohmann::json summarize_seeds(const std::vector<RunResult>& results);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace eegbench
