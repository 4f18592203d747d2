#include "eegbench/classical/linear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "eegbench/errors.hpp"

namespace eegbench {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow.
double logistic_loss(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

struct Problem {
  Eigen::Map<const RowMatrix> x;
  Eigen::VectorXd y;       // +1 / -1
  Eigen::VectorXd weight;  // per-sample weight / total weight
  LossKind loss;
  double lambda;
};

// Objective and d(loss)/d(decision) per sample, already weight-scaled.
double evaluate(const Problem& p, const Eigen::VectorXd& w, double b, Eigen::VectorXd& dloss) {
  const Eigen::VectorXd f = (p.x * w).array() + b;
  dloss.resize(f.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double m = p.y[i] * f[i];
    if (p.loss == LossKind::Logistic) {
      total += p.weight[i] * logistic_loss(m);
      dloss[i] = -p.weight[i] * p.y[i] * sigmoid(-m);
    } else {
      total += p.weight[i] * std::max(0.0, 1.0 - m);
      dloss[i] = m < 1.0 ? -p.weight[i] * p.y[i] : 0.0;
    }
  }
  return total + p.lambda * w.squaredNorm();
}

}  // namespace

std::string_view loss_name(LossKind loss) noexcept { return loss == LossKind::Logistic ? "logistic" : "hinge"; }

LinearModel linear_fit(const LabeledData& train, const LinearConfig& config, const ClassWeights& weights) {
  if (train.rows == 0) throw EmptyInputError("linear model needs a non-empty training set");
  std::vector<bool> present(static_cast<std::size_t>(train.num_classes), false);
  for (int y : train.labels) present[static_cast<std::size_t>(y)] = true;
  if (std::count(present.begin(), present.end(), true) < 2) throw FitError("linear model needs at least two classes");
  if (!(config.step_size > 0.0)) throw ConfigError("linear step size must be positive");

  LinearModel model;
  model.config = config;
  model.num_classes = train.num_classes;

  Problem p{Eigen::Map<const RowMatrix>(train.features.data(), static_cast<Eigen::Index>(train.rows),
                                        static_cast<Eigen::Index>(train.cols)),
            Eigen::VectorXd(static_cast<Eigen::Index>(train.rows)),
            Eigen::VectorXd(static_cast<Eigen::Index>(train.rows)), config.loss, config.l2_lambda};
  double weight_total = 0.0;
  for (std::size_t i = 0; i < train.rows; ++i) weight_total += weights[train.labels[i]];
  for (std::size_t i = 0; i < train.rows; ++i)
    p.weight[static_cast<Eigen::Index>(i)] = weights[train.labels[i]] / weight_total;

  const int problems = train.num_classes == 2 ? 1 : train.num_classes;
  for (int c = 0; c < problems; ++c) {
    const int positive = train.num_classes == 2 ? 1 : c;
    for (std::size_t i = 0; i < train.rows; ++i)
      p.y[static_cast<Eigen::Index>(i)] = train.labels[i] == positive ? 1.0 : -1.0;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(train.cols));
    double b = 0.0;
    double step = config.step_size;
    Eigen::VectorXd dloss;
    Eigen::VectorXd candidate_dloss;
    double objective = evaluate(p, w, b, dloss);
    std::vector<double> history{objective};
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      const Eigen::VectorXd grad_w = p.x.transpose() * dloss + 2.0 * p.lambda * w;
      const double grad_b = dloss.sum();
      const Eigen::VectorXd next_w = w - step * grad_w;
      const double next_b = b - step * grad_b;
      const double next = evaluate(p, next_w, next_b, candidate_dloss);
      if (!std::isfinite(next)) {
        throw TrainingDivergedError("linear objective became non-finite at epoch " + std::to_string(epoch));
      }
      if (next <= objective) {
        const double change = objective - next;
        w = next_w;
        b = next_b;
        dloss.swap(candidate_dloss);
        objective = next;
        history.push_back(objective);
        if (change < config.tolerance) break;
      } else {
        step *= 0.5;
        history.push_back(objective);
        if (step < 1e-12) break;
      }
    }
    model.weights.emplace_back(w.data(), w.data() + w.size());
    model.biases.push_back(b);
    model.loss_history.push_back(std::move(history));
  }
  return model;
}

double linear_decision(const LinearModel& model, std::size_t c, std::span<const double> x) {
  const auto& w = model.weights.at(c);
  if (x.size() != w.size()) throw ShapeError("query width does not match linear model");
  double f = model.biases[c];
  for (std::size_t j = 0; j < w.size(); ++j) f += w[j] * x[j];
  return f;
}

ProbPrediction linear_predict(const LinearModel& model, std::span<const double> x) {
  auto score = [&](std::size_t c) {
    const double f = linear_decision(model, c, x);
    if (model.config.loss == LossKind::Logistic) return sigmoid(f);
    double norm = 0.0;
    for (double v : model.weights[c]) norm += v * v;
    norm = std::sqrt(norm);
    return norm > 0.0 ? sigmoid(f / norm) : 0.5;
  };
  ProbPrediction p;
  if (model.num_classes == 2) {
    const double pos = score(0);
    p.scores = {1.0 - pos, pos};
    return p;
  }
  for (std::size_t c = 0; c < model.weights.size(); ++c) p.scores.push_back(score(c));
  double sum = 0.0;
  for (double s : p.scores) sum += s;
  if (sum > 0.0) {
    for (double& s : p.scores) s /= sum;
  } else {
    // Every sigmoid underflowed; no class is preferred.
    for (double& s : p.scores) s = 1.0 / static_cast<double>(p.scores.size());
  }
  return p;
}

}  // namespace eegbench
