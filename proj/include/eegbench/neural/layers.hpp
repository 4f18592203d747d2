#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eegbench/neural/tensor.hpp"
#include "eegbench/rng.hpp"

namespace eegbench::nn {

enum class Mode { Train, Eval };

/// A differentiable stage of a feed-forward network. Tensors are batch-first:
/// an input of shape [B, ...] maps to [B, ...]. `forward` records whatever
/// `backward` needs; `backward` takes d(loss)/d(output), adds parameter
/// gradients into each parameter's grad buffer, and returns d(loss)/d(input).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string_view type() const noexcept = 0;
  /// Per-sample output shape for a per-sample input shape; throws ShapeError.
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor forward(const Tensor& input, Mode mode, Rng& rng) = 0;
  virtual Tensor backward(const Tensor& grad_output) = 0;
  virtual std::vector<Tensor*> parameters() { return {}; }
  /// Architecture description (no parameter values).
  virtual nlohmann::json spec() const = 0;
  /// Glorot-uniform weights, zero biases (cells may override biases).
  virtual void initialize(Rng&) {}
};

/// Reshapes each sample; [B, in...] -> [B, target...].
class Reshape final : public Layer {
 public:
  explicit Reshape(Shape target) : target_(std::move(target)) {}
  std::string_view type() const noexcept override { return "reshape"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  nlohmann::json spec() const override;

 private:
  Shape target_;
  Shape input_shape_;
};

/// Valid 1-D convolution, stride 1: [B, C, L] -> [B, O, L - K + 1].
class Conv1D final : public Layer {
 public:
  Conv1D(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size);
  std::string_view type() const noexcept override { return "conv1d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Tensor*> parameters() override { return {&weight_, &bias_}; }
  nlohmann::json spec() const override;
  void initialize(Rng& rng) override;

  Tensor& weight() noexcept { return weight_; }
  Tensor& bias() noexcept { return bias_; }

 private:
  std::size_t in_, out_, kernel_;
  Tensor weight_;  // [O, C, K]
  Tensor bias_;    // [O]
  Tensor input_;
};

/// Non-overlapping max pooling; the trailing remainder is dropped. The
/// gradient goes to the first maximum of each window.
class MaxPool1D final : public Layer {
 public:
  explicit MaxPool1D(std::size_t window);
  std::string_view type() const noexcept override { return "maxpool1d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  nlohmann::json spec() const override;

 private:
  std::size_t window_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

/// y = x W^T + b: [B, in] -> [B, out].
class Dense final : public Layer {
 public:
  Dense(std::size_t in_dim, std::size_t out_dim);
  std::string_view type() const noexcept override { return "dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Tensor*> parameters() override { return {&weight_, &bias_}; }
  nlohmann::json spec() const override;
  void initialize(Rng& rng) override;

  Tensor& weight() noexcept { return weight_; }
  Tensor& bias() noexcept { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor weight_;  // [out, in]
  Tensor bias_;    // [out]
  Tensor input_;
};

class ReLU final : public Layer {
 public:
  std::string_view type() const noexcept override { return "relu"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  nlohmann::json spec() const override { return {{"type", "relu"}}; }

 private:
  Tensor output_;
};

/// Inverted dropout: in training, each unit is zeroed with probability `rate`
/// and survivors are scaled by 1 / (1 - rate). Identity in evaluation.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate);
  std::string_view type() const noexcept override { return "dropout"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output) override;
  nlohmann::json spec() const override { return {{"type", "dropout"}, {"rate", rate_}}; }

 private:
  double rate_;
  std::vector<double> mask_;  // empty in eval mode
};

/// Last time step of a sequence: [B, T, H] -> [B, H].
class LastStep final : public Layer {
 public:
  std::string_view type() const noexcept override { return "last_step"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  nlohmann::json spec() const override { return {{"type", "last_step"}}; }

 private:
  Shape input_shape_;
};

// Single-sample kernels behind the layers.

/// input [C, L], weight [O, C, K], bias [O] -> [O, L - K + 1].
Tensor conv1d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

/// input [C, L] (or [L]) -> [C, L / window].
PoolResult maxpool1d_forward(const Tensor& input, std::size_t window);

struct SoftmaxLoss {
  double loss = 0.0;
  std::vector<double> probabilities;
};

/// Max-subtracted softmax; loss = -weight * log p[label].
SoftmaxLoss softmax_cross_entropy(std::span<const double> logits, int label, double weight);

/// Batch version over logits [B, C]. Loss is the mean over the batch of the
/// weighted per-sample loss; `grad_logits` receives its gradient.
double softmax_cross_entropy_batch(const Tensor& logits, std::span<const int> labels,
                                   std::span<const double> weights, Tensor& grad_logits);

/// Row-wise softmax of [B, C] logits.
Tensor softmax_rows(const Tensor& logits);

/// Fills with U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(std::span<double> values, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace eegbench::nn
