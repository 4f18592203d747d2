#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "eegbench/neural/layers.hpp"
#include "eegbench/neural/recurrent.hpp"

namespace eegbench::nn {

/// Ordered feed-forward stack ending in logits; softmax is applied by the
/// loss and by `predict`.
class Network {
 public:
  /// `input_shape` is per sample. The layer chain is validated on construction.
  Network(Shape input_shape, std::vector<std::unique_ptr<Layer>> layers);

  const Shape& input_shape() const noexcept { return input_shape_; }
  /// Per-sample shapes after each layer; back() is the logits shape.
  const std::vector<Shape>& shapes() const noexcept { return shapes_; }
  std::size_t output_dim() const { return shapes_.back().at(0); }
  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }

  /// Each layer is initialized from its own seed derived from `seed`.
  void initialize(std::uint64_t seed);

  /// input [B, input_shape...] -> logits [B, C].
  Tensor forward(const Tensor& input, Mode mode, Rng& rng);
  /// Propagates d(loss)/d(logits) back, accumulating parameter gradients.
  Tensor backward(const Tensor& grad_logits);

  std::vector<Tensor*> parameters();
  std::size_t parameter_count() const;
  void zero_grad();

  /// Flat copy of every parameter value, in `parameters()` order.
  std::vector<double> snapshot();
  void restore(const std::vector<double>& values);

  /// {"input_shape", "layers": [spec...], "parameters": [[...]...]}.
  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);

 private:
  Shape input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<Shape> shapes_;
};

inline constexpr std::size_t kCnnDenseWidths[] = {128, 64, 32};
inline constexpr std::size_t kRnnHidden = 32;
inline constexpr std::size_t kRnnHeadWidth = 16;
inline constexpr double kRnnDropout = 0.5;

/// [178] -> Conv(1->8, k1) -> ReLU -> Pool2 -> Conv(8->16, k2) -> ReLU -> Pool2
/// -> flatten -> Dense 128 -> 64 -> 32 -> num_classes with ReLU between.
Network build_cnn(int num_classes, std::size_t k1 = 7, std::size_t k2 = 5, std::size_t input_length = 178);

/// [178] as 178 scalar steps -> cell(32) -> Dropout 0.5 -> cell(32) -> last
/// state -> Dense 16 -> ReLU -> Dense num_classes.
Network build_rnn(CellKind kind, int num_classes, std::size_t input_length = 178);

std::unique_ptr<Layer> make_layer(const nlohmann::json& spec);

}  // namespace eegbench::nn
