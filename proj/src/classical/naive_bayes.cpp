#include "eegbench/classical/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "eegbench/errors.hpp"

namespace eegbench {

GaussianNbModel nb_fit(const LabeledData& train) {
  const auto classes = static_cast<std::size_t>(train.num_classes);
  const std::size_t d = train.cols;
  std::vector<std::size_t> counts(classes, 0);
  for (int y : train.labels) ++counts[static_cast<std::size_t>(y)];
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] < 2) {
      throw FitError("naive Bayes needs at least two records of class " + std::to_string(c) + ", found " +
                     std::to_string(counts[c]));
    }
  }

  GaussianNbModel m;
  m.priors.resize(classes);
  m.means.assign(classes, std::vector<double>(d, 0.0));
  m.variances.assign(classes, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < train.rows; ++i) {
    const auto c = static_cast<std::size_t>(train.labels[i]);
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) m.means[c][j] += r[j];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    m.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(train.rows);
    for (double& mu : m.means[c]) mu /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < train.rows; ++i) {
    const auto c = static_cast<std::size_t>(train.labels[i]);
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = r[j] - m.means[c][j];
      m.variances[c][j] += dev * dev;
    }
  }

  double mean_all = 0.0;
  for (double v : train.features) mean_all += v;
  mean_all /= static_cast<double>(train.features.size());
  double pooled = 0.0;
  for (double v : train.features) pooled += (v - mean_all) * (v - mean_all);
  pooled /= static_cast<double>(train.features.size());
  // Absolute lower bound keeps the floor positive on constant data.
  m.variance_floor = std::max(kNbVarianceFloorRatio * pooled, 1e-300);

  for (std::size_t c = 0; c < classes; ++c)
    for (double& v : m.variances[c]) v = std::max(v / static_cast<double>(counts[c]), m.variance_floor);
  return m;
}

ProbPrediction nb_predict(const GaussianNbModel& model, std::span<const double> x) {
  const std::size_t classes = model.priors.size();
  std::vector<double> log_joint(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (x.size() != model.means[c].size()) throw ShapeError("query width does not match naive Bayes model");
    double lj = std::log(model.priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = model.variances[c][j];
      const double dev = x[j] - model.means[c][j];
      lj -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + dev * dev / var);
    }
    log_joint[c] = lj;
  }
  const double top = *std::max_element(log_joint.begin(), log_joint.end());
  if (!std::isfinite(top)) return ProbPrediction{model.priors};  // every likelihood underflowed
  double sum = 0.0;
  for (double lj : log_joint) sum += std::exp(lj - top);
  const double log_evidence = top + std::log(sum);
  ProbPrediction p;
  for (double lj : log_joint) p.scores.push_back(std::exp(lj - log_evidence));
  return p;
}

}  // namespace eegbench
