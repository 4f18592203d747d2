#include "eegbench/classical/forest.hpp"

#include <cmath>

#include "eegbench/errors.hpp"
#include "eegbench/parallel.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

RandomForestModel rf_fit(const LabeledData& train, const ForestConfig& config, std::uint64_t seed) {
  if (config.n_estimators < 1) throw ConfigError("random forest needs n_estimators >= 1");
  if (train.rows == 0) throw EmptyInputError("random forest needs a non-empty training set");

  RandomForestModel model;
  model.config = config;
  if (model.config.feature_subset_size == 0)
    model.config.feature_subset_size = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(train.cols))));
  model.num_classes = train.num_classes;
  model.seed = seed;
  model.trees.resize(static_cast<std::size_t>(config.n_estimators));

  const SortedColumns columns(train);
  const TreeConfig tree_config{config.max_depth, model.config.feature_subset_size};
  parallel_for(model.trees.size(), [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> counts(train.rows, config.bootstrap ? 0.0 : 1.0);
    if (config.bootstrap)
      for (std::size_t draw = 0; draw < train.rows; ++draw) counts[rng.below(train.rows)] += 1.0;
    model.trees[t] = fit_classification_tree(columns, train.labels, train.num_classes, counts, tree_config, rng);
  });
  return model;
}

ProbPrediction rf_predict(const RandomForestModel& model, std::span<const double> x) {
  ProbPrediction p{std::vector<double>(static_cast<std::size_t>(model.num_classes), 0.0)};
  for (const auto& tree : model.trees) {
    const auto counts = tree.leaf_counts(x);
    double total = 0.0;
    for (double c : counts) total += c;
    for (std::size_t c = 0; c < counts.size(); ++c) p.scores[c] += counts[c] / total;
  }
  for (double& s : p.scores) s /= static_cast<double>(model.trees.size());
  return p;
}

}  // namespace eegbench
