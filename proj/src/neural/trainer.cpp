#include "eegbench/neural/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "eegbench/errors.hpp"
#include "eegbench/neural/optimizer.hpp"

namespace eegbench::nn {

namespace {

constexpr std::size_t kPredictBatch = 256;

Tensor gather(const LabeledData& data, std::span<const std::size_t> rows, const Shape& sample_shape) {
  Shape shape{rows.size()};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  Tensor t(shape);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = data.row(rows[i]);
    std::copy(r.begin(), r.end(), t.data() + i * data.cols);
  }
  return t;
}

double accuracy_on(Network& net, const LabeledData& data, std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  const LabeledData sub = data.subset(rows);
  const auto preds = predict_proba(net, sub);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += argmax_label(preds[i]) == sub.labels[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace

TrainResult train(Network& net, const LabeledData& data, const SplitPlan& validation, const TrainConfig& config,
                  const ClassWeights& weights, const EpochCallback& on_epoch) {
  if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (config.patience < 1) throw ConfigError("patience must be at least 1");
  if (config.max_epochs < 0) throw ConfigError("max_epochs must be non-negative");
  if (data.cols != shape_size(net.input_shape()))
    throw ShapeError("training rows have " + std::to_string(data.cols) + " features, network expects " +
                     shape_string(net.input_shape()));
  if (net.output_dim() != static_cast<std::size_t>(data.num_classes))
    throw ShapeError("network output width does not match the number of classes");
  if (weights.weights.size() != static_cast<std::size_t>(data.num_classes))
    throw ShapeError("class weights do not match the number of classes");

  TrainResult result;
  if (config.max_epochs == 0) return result;
  if (validation.train_indices.empty() || validation.test_indices.empty())
    throw PreconditionError("training needs non-empty train and validation index sets");
  for (auto idx : validation.train_indices)
    if (idx >= data.rows) throw PreconditionError("validation plan index out of range");
  for (auto idx : validation.test_indices)
    if (idx >= data.rows) throw PreconditionError("validation plan index out of range");

  Adam optimizer(net.parameters(), AdamConfig{.learning_rate = config.learning_rate});
  std::vector<double> best = net.snapshot();
  double best_acc = -1.0;
  int since_best = 0;
  std::vector<std::size_t> order = validation.train_indices;
  std::vector<int> labels;
  std::vector<double> sample_weights;
  Tensor grad;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> rows(order.data() + start, n);
      const Tensor x = gather(data, rows, net.input_shape());
      labels.resize(n);
      sample_weights.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        labels[i] = data.labels[rows[i]];
        sample_weights[i] = weights[labels[i]];
      }
      net.zero_grad();
      const Tensor logits = net.forward(x, Mode::Train, rng);
      const double loss = softmax_cross_entropy_batch(logits, labels, sample_weights, grad);
      if (!std::isfinite(loss)) throw TrainingDivergedError("non-finite training loss in epoch " + std::to_string(epoch));
      net.backward(grad);
      optimizer.step();
      loss_sum += loss * static_cast<double>(n);
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), accuracy_on(net, data, validation.test_indices)};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      best = net.snapshot();
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  net.restore(best);
  result.best_val_accuracy = best_acc;
  return result;
}

std::vector<ProbPrediction> predict_proba(Network& net, std::span<const double> rows, std::size_t count) {
  const std::size_t width = shape_size(net.input_shape());
  if (rows.size() != count * width) throw ShapeError("prediction rows do not match the network input width");
  std::vector<ProbPrediction> out;
  out.reserve(count);
  Rng unused(0);
  for (std::size_t start = 0; start < count; start += kPredictBatch) {
    const std::size_t n = std::min(kPredictBatch, count - start);
    Shape shape{n};
    shape.insert(shape.end(), net.input_shape().begin(), net.input_shape().end());
    const Tensor x(shape, std::vector<double>(rows.begin() + static_cast<std::ptrdiff_t>(start * width),
                                              rows.begin() + static_cast<std::ptrdiff_t>((start + n) * width)));
    const Tensor p = softmax_rows(net.forward(x, Mode::Eval, unused));
    const std::size_t c = p.dim(1);
    for (std::size_t i = 0; i < n; ++i) out.push_back({std::vector<double>(p.data() + i * c, p.data() + (i + 1) * c)});
  }
  return out;
}

std::vector<ProbPrediction> predict_proba(Network& net, const LabeledData& data) {
  return predict_proba(net, data.features, data.rows);
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_loss,val_accuracy\n";
  for (const auto& r : history) out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_accuracy) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace eegbench::nn
