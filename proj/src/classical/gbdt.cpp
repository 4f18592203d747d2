#include "eegbench/classical/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eegbench/errors.hpp"
#include "eegbench/parallel.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void softmax_inplace(std::span<double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - top);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

std::size_t ensembles(int num_classes) { return num_classes == 2 ? 1 : static_cast<std::size_t>(num_classes); }

ProbPrediction to_prob(int num_classes, std::vector<double> raw) {
  if (num_classes == 2) {
    const double p = sigmoid(raw[0]);
    return ProbPrediction{{1.0 - p, p}};
  }
  softmax_inplace(raw);
  return ProbPrediction{std::move(raw)};
}

// Weighted mean log-loss of raw scores `f` (row-major n x e).
double weighted_log_loss(const std::vector<double>& f, std::span<const int> labels, std::span<const double> w,
                         std::size_t e) {
  double total = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* fi = f.data() + i * e;
    double li = 0.0;
    if (e == 1) {
      li = softplus(fi[0]) - (labels[i] == 1 ? fi[0] : 0.0);
    } else {
      const double top = *std::max_element(fi, fi + e);
      double sum = 0.0;
      for (std::size_t k = 0; k < e; ++k) sum += std::exp(fi[k] - top);
      li = top + std::log(sum) - fi[static_cast<std::size_t>(labels[i])];
    }
    total += w[i] * li;
    weight += w[i];
  }
  return total / weight;
}

}  // namespace

GbdtModel gbdt_fit(const LabeledData& train, const GbdtConfig& config, const ClassWeights& weights,
                   std::uint64_t seed) {
  if (config.n_rounds < 1) throw ConfigError("GBDT needs n_rounds >= 1");
  if (config.max_depth < 1) throw ConfigError("GBDT needs max_depth >= 1");
  if (train.rows == 0) throw EmptyInputError("GBDT needs a non-empty training set");

  const std::size_t n = train.rows;
  const std::size_t e = ensembles(train.num_classes);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = weights[train.labels[i]];
  double weight_total = 0.0;
  std::vector<double> class_weight(static_cast<std::size_t>(train.num_classes), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    class_weight[static_cast<std::size_t>(train.labels[i])] += w[i];
    weight_total += w[i];
  }

  GbdtModel model;
  model.config = config;
  model.num_classes = train.num_classes;
  if (e == 1) {
    const double p = class_weight[1] / weight_total;
    if (!(p > 0.0 && p < 1.0)) throw FitError("GBDT needs both classes present");
    model.initial = {std::log(p / (1.0 - p))};
  } else {
    for (std::size_t k = 0; k < e; ++k) {
      if (!(class_weight[k] > 0.0)) throw FitError("GBDT: class " + std::to_string(k) + " is absent");
      model.initial.push_back(std::log(class_weight[k] / weight_total));
    }
  }

  std::vector<double> f(n * e);
  for (std::size_t i = 0; i < n; ++i) std::copy(model.initial.begin(), model.initial.end(), f.begin() + static_cast<std::ptrdiff_t>(i * e));
  model.train_loss.push_back(weighted_log_loss(f, train.labels, w, e));

  const SortedColumns columns(train);
  const TreeConfig tree_config{config.max_depth, 0};
  std::vector<std::vector<double>> residuals(e, std::vector<double>(n));
  std::vector<double> prob(e);
  for (int round = 0; round < config.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(f.begin() + static_cast<std::ptrdiff_t>(i * e), f.begin() + static_cast<std::ptrdiff_t>((i + 1) * e), prob.begin());
      if (e == 1) {
        prob[0] = sigmoid(prob[0]);
      } else {
        softmax_inplace(prob);
      }
      for (std::size_t k = 0; k < e; ++k) {
        const int target = e == 1 ? 1 : static_cast<int>(k);
        const double r = (train.labels[i] == target ? 1.0 : 0.0) - prob[k];
        if (!std::isfinite(r)) {
          throw TrainingDivergedError("GBDT residual became non-finite in round " + std::to_string(round + 1));
        }
        residuals[k][i] = r;
      }
    }

    std::vector<DecisionTree> trees(e);
    parallel_for(e, [&](std::size_t k) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(round) * e + k));
      trees[k] = fit_regression_tree(columns, residuals[k], w, tree_config, rng);
    });
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = train.row(i);
      for (std::size_t k = 0; k < e; ++k) f[i * e + k] += config.learning_rate * trees[k].predict_value(x);
    }
    model.rounds.push_back(std::move(trees));
    const double loss = weighted_log_loss(f, train.labels, w, e);
    if (!std::isfinite(loss)) {
      throw TrainingDivergedError("GBDT training loss became non-finite in round " + std::to_string(round + 1));
    }
    model.train_loss.push_back(loss);
  }
  return model;
}

ProbPrediction gbdt_predict_staged(const GbdtModel& model, std::span<const double> x, std::size_t rounds) {
  std::vector<double> raw = model.initial;
  const std::size_t limit = std::min(rounds, model.rounds.size());
  for (std::size_t m = 0; m < limit; ++m)
    for (std::size_t k = 0; k < raw.size(); ++k) raw[k] += model.config.learning_rate * model.rounds[m][k].predict_value(x);
  return to_prob(model.num_classes, std::move(raw));
}

ProbPrediction gbdt_predict(const GbdtModel& model, std::span<const double> x) {
  return gbdt_predict_staged(model, x, model.rounds.size());
}

}  // namespace eegbench
