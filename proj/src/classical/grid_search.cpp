#include "eegbench/classical/grid_search.hpp"

#include <exception>

#include "eegbench/errors.hpp"
#include "eegbench/metrics.hpp"
#include "eegbench/parallel.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

std::vector<Params> expand_grid(const nlohmann::json& axes) {
  std::vector<Params> cells{Params::object()};
  if (!axes.is_object()) throw ConfigError("parameter grid must be a JSON object");
  for (const auto& [name, values] : axes.items()) {
    const nlohmann::json list = values.is_array() ? values : nlohmann::json::array({values});
    if (list.empty()) throw ConfigError("grid axis '" + name + "' is empty");
    std::vector<Params> next;
    for (const auto& cell : cells) {
      for (const auto& v : list) {
        Params c = cell;
        c[name] = v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

GridResult grid_search(const ClassifierFactory& factory, const std::vector<Params>& grid, const LabeledData& data,
                       const FoldPlan& folds, SelectionMetric metric, bool balance_classes, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("parameter grid is empty");
  if (folds.folds.size() < 2) throw PreconditionError("grid search needs at least two folds");

  const std::size_t k = folds.folds.size();
  std::vector<LabeledData> fold_train(k);
  std::vector<LabeledData> fold_valid(k);
  for (std::size_t f = 0; f < k; ++f) {
    fold_train[f] = data.subset(folds.training_for(f));
    fold_valid[f] = data.subset(folds.folds[f]);
  }

  std::vector<double> scores(grid.size() * k, 0.0);
  std::vector<std::string> errors(grid.size() * k);
  parallel_for(grid.size() * k, [&](std::size_t unit) {
    const std::size_t cell = unit / k;
    const std::size_t f = unit % k;
    try {
      const LabeledData& train = fold_train[f];
      const LabeledData& valid = fold_valid[f];
      const ClassWeights weights =
          balance_classes ? class_weights(train.labels, train.num_classes) : ClassWeights::uniform(train.num_classes);
      auto model = factory(grid[cell]);
      model->fit(train, weights, derive_seed(seed, unit));
      std::vector<int> predicted(valid.rows);
      std::vector<double> positive(valid.rows);
      for (std::size_t i = 0; i < valid.rows; ++i) {
        if (metric == SelectionMetric::Auc) {
          positive[i] = model->predict_proba(valid.row(i)).scores.at(1);
        } else {
          predicted[i] = model->predict_label(valid.row(i));
        }
      }
      scores[unit] = metric == SelectionMetric::Auc ? roc_auc(positive, valid.labels) : accuracy(predicted, valid.labels);
    } catch (const std::exception& ex) {
      errors[unit] = std::string("fold ") + std::to_string(f) + ": " + ex.what();
    }
  });

  GridResult result;
  std::optional<std::size_t> best;
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    GridCell gc;
    gc.params = grid[cell];
    double sum = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t unit = cell * k + f;
      if (!errors[unit].empty() && !gc.failure) gc.failure = errors[unit];
      gc.fold_scores.push_back(scores[unit]);
      sum += scores[unit];
    }
    gc.mean_score = sum / static_cast<double>(k);
    if (!gc.failure && (!best || gc.mean_score > result.cells[*best].mean_score)) best = cell;
    result.cells.push_back(std::move(gc));
  }
  if (!best) throw FitError("every grid cell failed; first error: " + *result.cells.front().failure);
  result.best_index = *best;
  result.best_params = grid[*best];
  return result;
}

void to_json(nlohmann::json& j, const GridResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cj = {{"params", c.params}, {"fold_scores", c.fold_scores}, {"mean_score", c.mean_score}};
    if (c.failure) cj["failure"] = *c.failure;
    cells.push_back(std::move(cj));
  }
  j = {{"best_index", r.best_index}, {"best_params", r.best_params}, {"cells", cells}};
}

}  // namespace eegbench
