#include "eegbench/neural/network.hpp"

#include <algorithm>
#include <string>

#include "eegbench/errors.hpp"

namespace eegbench::nn {

namespace {

using nlohmann::json;

template <class L, class... Args>
void push(std::vector<std::unique_ptr<Layer>>& layers, Args&&... args) {
  layers.push_back(std::make_unique<L>(std::forward<Args>(args)...));
}

}  // namespace

Network::Network(Shape input_shape, std::vector<std::unique_ptr<Layer>> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("network has no layers");
  Shape s = input_shape_;
  for (const auto& l : layers_) {
    s = l->output_shape(s);
    shapes_.push_back(s);
  }
  if (s.size() != 1) throw ShapeError("network output must be a logit vector, got " + shape_string(s));
}

void Network::initialize(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    layers_[i]->initialize(rng);
  }
}

Tensor Network::forward(const Tensor& input, Mode mode, Rng& rng) {
  if (input.rank() == 0 || Shape(input.shape().begin() + 1, input.shape().end()) != input_shape_)
    throw ShapeError("network expects batches of " + shape_string(input_shape_) + ", got " + shape_string(input.shape()));
  Tensor x = layers_.front()->forward(input, mode, rng);
  for (std::size_t i = 1; i < layers_.size(); ++i) x = layers_[i]->forward(x, mode, rng);
  return x;
}

Tensor Network::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* p : l->parameters()) out.push_back(p);
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (Tensor* p : const_cast<Network*>(this)->parameters()) n += p->size();
  return n;
}

void Network::zero_grad() {
  for (Tensor* p : parameters()) p->zero_grad();
}

std::vector<double> Network::snapshot() {
  std::vector<double> out;
  for (Tensor* p : parameters()) out.insert(out.end(), p->values().begin(), p->values().end());
  return out;
}

void Network::restore(const std::vector<double>& values) {
  std::size_t at = 0;
  for (Tensor* p : parameters()) {
    if (at + p->size() > values.size()) throw ShapeError("parameter snapshot too short");
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), p->size(), p->values().begin());
    at += p->size();
  }
  if (at != values.size()) throw ShapeError("parameter snapshot too long");
}

json Network::to_json() const {
  json layers = json::array();
  for (const auto& l : layers_) layers.push_back(l->spec());
  json params = json::array();
  for (Tensor* p : const_cast<Network*>(this)->parameters())
    params.push_back(std::vector<double>(p->values().begin(), p->values().end()));
  return {{"input_shape", input_shape_}, {"layers", layers}, {"parameters", params}};
}

Network Network::from_json(const json& j) {
  try {
    std::vector<std::unique_ptr<Layer>> layers;
    for (const auto& spec : j.at("layers")) layers.push_back(make_layer(spec));
    Network net(j.at("input_shape").get<Shape>(), std::move(layers));
    const auto& params = j.at("parameters");
    auto targets = net.parameters();
    if (params.size() != targets.size()) throw ConfigError("network artifact has the wrong number of parameter tensors");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto v = params[i].get<std::vector<double>>();
      if (v.size() != targets[i]->size()) throw ConfigError("network artifact parameter " + std::to_string(i) + " has the wrong size");
      std::copy(v.begin(), v.end(), targets[i]->values().begin());
    }
    return net;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed network artifact: ") + ex.what());
  }
}

std::unique_ptr<Layer> make_layer(const json& spec) {
  const auto type = spec.at("type").get<std::string>();
  if (type == "reshape") return std::make_unique<Reshape>(spec.at("shape").get<Shape>());
  if (type == "conv1d")
    return std::make_unique<Conv1D>(spec.at("in_channels").get<std::size_t>(), spec.at("out_channels").get<std::size_t>(),
                                    spec.at("kernel_size").get<std::size_t>());
  if (type == "maxpool1d") return std::make_unique<MaxPool1D>(spec.at("window").get<std::size_t>());
  if (type == "dense") return std::make_unique<Dense>(spec.at("in_dim").get<std::size_t>(), spec.at("out_dim").get<std::size_t>());
  if (type == "relu") return std::make_unique<ReLU>();
  if (type == "dropout") return std::make_unique<Dropout>(spec.at("rate").get<double>());
  if (type == "last_step") return std::make_unique<LastStep>();
  if (type == "gru" || type == "lstm")
    return std::make_unique<Recurrent>(parse_cell(type), spec.at("input_dim").get<std::size_t>(),
                                       spec.at("hidden_dim").get<std::size_t>());
  throw ConfigError("unknown layer type '" + type + "'");
}

Network build_cnn(int num_classes, std::size_t k1, std::size_t k2, std::size_t input_length) {
  if (num_classes < 2) throw ConfigError("a network needs at least 2 output classes");
  std::vector<std::unique_ptr<Layer>> layers;
  push<Reshape>(layers, Shape{1, input_length});
  push<Conv1D>(layers, 1, 8, k1);
  push<ReLU>(layers);
  push<MaxPool1D>(layers, 2);
  push<Conv1D>(layers, 8, 16, k2);
  push<ReLU>(layers);
  push<MaxPool1D>(layers, 2);
  // Flattened width from the valid-convolution and pooling arithmetic.
  const std::size_t l1 = input_length >= k1 ? (input_length - k1 + 1) / 2 : 0;
  const std::size_t l2 = l1 >= k2 ? (l1 - k2 + 1) / 2 : 0;
  if (l2 == 0) throw ShapeError("kernel sizes too large for input length " + std::to_string(input_length));
  std::size_t width = 16 * l2;
  push<Reshape>(layers, Shape{width});
  for (std::size_t next : kCnnDenseWidths) {
    push<Dense>(layers, width, next);
    push<ReLU>(layers);
    width = next;
  }
  push<Dense>(layers, width, static_cast<std::size_t>(num_classes));
  return Network({input_length}, std::move(layers));
}

Network build_rnn(CellKind kind, int num_classes, std::size_t input_length) {
  if (num_classes < 2) throw ConfigError("a network needs at least 2 output classes");
  std::vector<std::unique_ptr<Layer>> layers;
  push<Reshape>(layers, Shape{input_length, 1});
  push<Recurrent>(layers, kind, 1, kRnnHidden);
  push<Dropout>(layers, kRnnDropout);
  push<Recurrent>(layers, kind, kRnnHidden, kRnnHidden);
  push<LastStep>(layers);
  push<Dense>(layers, kRnnHidden, kRnnHeadWidth);
  push<ReLU>(layers);
  push<Dense>(layers, kRnnHeadWidth, static_cast<std::size_t>(num_classes));
  return Network({input_length}, std::move(layers));
}

}  // namespace eegbench::nn
