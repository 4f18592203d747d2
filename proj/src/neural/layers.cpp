#include "eegbench/neural/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "eegbench/errors.hpp"

namespace eegbench::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

Shape per_sample(const Shape& batch_shape) { return Shape(batch_shape.begin() + 1, batch_shape.end()); }

Shape with_batch(std::size_t batch, const Shape& sample) {
  Shape s{batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

void require_rank(const Tensor& t, std::size_t rank, std::string_view layer) {
  if (t.rank() != rank)
    throw ShapeError(std::string(layer) + " expects a rank-" + std::to_string(rank) + " batch, got " + shape_string(t.shape()));
}

}  // namespace

void glorot_uniform(std::span<double> values, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : values) v = rng.uniform(-a, a);
}

// ---- Reshape ---------------------------------------------------------------

Shape Reshape::output_shape(const Shape& input) const {
  if (shape_size(input) != shape_size(target_))
    throw ShapeError("cannot reshape sample " + shape_string(input) + " to " + shape_string(target_));
  return target_;
}

Tensor Reshape::forward(const Tensor& input, Mode, Rng&) {
  input_shape_ = input.shape();
  Tensor out = input;
  out.reshape(with_batch(input.dim(0), output_shape(per_sample(input.shape()))));
  return out;
}

Tensor Reshape::backward(const Tensor& grad_output) {
  Tensor g = grad_output;
  g.reshape(input_shape_);
  return g;
}

nlohmann::json Reshape::spec() const { return {{"type", "reshape"}, {"shape", target_}}; }

// ---- Conv1D ----------------------------------------------------------------

Tensor conv1d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.rank() != 2 || weight.rank() != 3 || bias.rank() != 1)
    throw ShapeError("conv1d_forward expects input [C,L], weight [O,C,K], bias [O]");
  const std::size_t c_in = input.dim(0);
  const std::size_t len = input.dim(1);
  const std::size_t c_out = weight.dim(0);
  const std::size_t k = weight.dim(2);
  if (weight.dim(1) != c_in || bias.dim(0) != c_out) throw ShapeError("conv1d weight/bias shape mismatch");
  if (len < k) throw ShapeError("conv1d input length " + std::to_string(len) + " is shorter than kernel " + std::to_string(k));
  const std::size_t out_len = len - k + 1;
  Tensor out({c_out, out_len});
  for (std::size_t o = 0; o < c_out; ++o) {
    double* y = out.data() + o * out_len;
    std::fill(y, y + out_len, bias[o]);
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* x = input.data() + c * len;
      const double* w = weight.data() + (o * c_in + c) * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double wj = w[j];
        for (std::size_t t = 0; t < out_len; ++t) y[t] += wj * x[t + j];
      }
    }
  }
  return out;
}

Conv1D::Conv1D(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size)
    : in_(in_channels), out_(out_channels), kernel_(kernel_size), weight_({out_channels, in_channels, kernel_size}),
      bias_({out_channels}) {
  if (in_ == 0 || out_ == 0 || kernel_ == 0) throw ShapeError("conv1d dimensions must be positive");
  weight_.enable_grad();
  bias_.enable_grad();
}

Shape Conv1D::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[0] != in_)
    throw ShapeError("conv1d expects [" + std::to_string(in_) + ", L] samples, got " + shape_string(input));
  if (input[1] < kernel_)
    throw ShapeError("conv1d input length " + std::to_string(input[1]) + " is shorter than kernel " + std::to_string(kernel_));
  return {out_, input[1] - kernel_ + 1};
}

Tensor Conv1D::forward(const Tensor& input, Mode, Rng&) {
  require_rank(input, 3, "conv1d");
  const Shape sample_out = output_shape(per_sample(input.shape()));
  input_ = input;
  const std::size_t batch = input.dim(0);
  const std::size_t in_size = in_ * input.dim(2);
  const std::size_t out_size = shape_size(sample_out);
  Tensor out(with_batch(batch, sample_out));
  for (std::size_t b = 0; b < batch; ++b) {
    Tensor x({in_, input.dim(2)}, std::vector<double>(input.data() + b * in_size, input.data() + (b + 1) * in_size));
    const Tensor y = conv1d_forward(x, weight_, bias_);
    std::copy(y.data(), y.data() + out_size, out.data() + b * out_size);
  }
  return out;
}

Tensor Conv1D::backward(const Tensor& grad_output) {
  const std::size_t batch = input_.dim(0);
  const std::size_t len = input_.dim(2);
  const std::size_t out_len = len - kernel_ + 1;
  Tensor grad_in(input_.shape());
  auto gw = weight_.grad();
  auto gb = bias_.grad();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_; ++o) {
      const double* dy = grad_output.data() + (b * out_ + o) * out_len;
      for (std::size_t t = 0; t < out_len; ++t) gb[o] += dy[t];
      for (std::size_t c = 0; c < in_; ++c) {
        const double* x = input_.data() + (b * in_ + c) * len;
        double* dx = grad_in.data() + (b * in_ + c) * len;
        const double* w = weight_.data() + (o * in_ + c) * kernel_;
        double* dw = gw.data() + (o * in_ + c) * kernel_;
        for (std::size_t j = 0; j < kernel_; ++j) {
          double acc = 0.0;
          const double wj = w[j];
          for (std::size_t t = 0; t < out_len; ++t) {
            acc += dy[t] * x[t + j];
            dx[t + j] += dy[t] * wj;
          }
          dw[j] += acc;
        }
      }
    }
  }
  return grad_in;
}

nlohmann::json Conv1D::spec() const {
  return {{"type", "conv1d"}, {"in_channels", in_}, {"out_channels", out_}, {"kernel_size", kernel_}};
}

void Conv1D::initialize(Rng& rng) {
  glorot_uniform(weight_.values(), in_ * kernel_, out_ * kernel_, rng);
  std::fill(bias_.values().begin(), bias_.values().end(), 0.0);
}

// ---- MaxPool1D -------------------------------------------------------------

PoolResult maxpool1d_forward(const Tensor& input, std::size_t window) {
  if (window == 0) throw ShapeError("pooling window must be positive");
  const std::size_t channels = input.rank() == 1 ? 1 : input.dim(0);
  const std::size_t len = input.rank() == 1 ? input.dim(0) : input.dim(1);
  if (input.rank() > 2) throw ShapeError("maxpool1d_forward expects [L] or [C, L]");
  if (len < window) throw ShapeError("pooling window exceeds input length");
  const std::size_t out_len = len / window;
  PoolResult r;
  r.output = Tensor(input.rank() == 1 ? Shape{out_len} : Shape{channels, out_len});
  r.argmax.resize(channels * out_len);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < out_len; ++t) {
      std::size_t best = c * len + t * window;
      for (std::size_t j = 1; j < window; ++j) {
        const std::size_t idx = c * len + t * window + j;
        if (input[idx] > input[best]) best = idx;
      }
      r.output[c * out_len + t] = input[best];
      r.argmax[c * out_len + t] = best;
    }
  }
  return r;
}

MaxPool1D::MaxPool1D(std::size_t window) : window_(window) {
  if (window_ == 0) throw ShapeError("pooling window must be positive");
}

Shape MaxPool1D::output_shape(const Shape& input) const {
  if (input.size() != 2) throw ShapeError("maxpool1d expects [C, L] samples, got " + shape_string(input));
  if (input[1] < window_) throw ShapeError("pooling window exceeds input length");
  return {input[0], input[1] / window_};
}

Tensor MaxPool1D::forward(const Tensor& input, Mode, Rng&) {
  require_rank(input, 3, "maxpool1d");
  const Shape sample_out = output_shape(per_sample(input.shape()));
  input_shape_ = input.shape();
  const std::size_t batch = input.dim(0);
  const std::size_t in_size = input.dim(1) * input.dim(2);
  const std::size_t out_size = shape_size(sample_out);
  Tensor out(with_batch(batch, sample_out));
  argmax_.resize(batch * out_size);
  for (std::size_t b = 0; b < batch; ++b) {
    Tensor x({input.dim(1), input.dim(2)}, std::vector<double>(input.data() + b * in_size, input.data() + (b + 1) * in_size));
    auto r = maxpool1d_forward(x, window_);
    std::copy(r.output.data(), r.output.data() + out_size, out.data() + b * out_size);
    for (std::size_t i = 0; i < out_size; ++i) argmax_[b * out_size + i] = b * in_size + r.argmax[i];
  }
  return out;
}

Tensor MaxPool1D::backward(const Tensor& grad_output) {
  Tensor grad_in(input_shape_);
  for (std::size_t i = 0; i < argmax_.size(); ++i) grad_in[argmax_[i]] += grad_output[i];
  return grad_in;
}

nlohmann::json MaxPool1D::spec() const { return {{"type", "maxpool1d"}, {"window", window_}}; }

// ---- Dense -----------------------------------------------------------------

Dense::Dense(std::size_t in_dim, std::size_t out_dim)
    : in_(in_dim), out_(out_dim), weight_({out_dim, in_dim}), bias_({out_dim}) {
  if (in_ == 0 || out_ == 0) throw ShapeError("dense dimensions must be positive");
  weight_.enable_grad();
  bias_.enable_grad();
}

Shape Dense::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in_)
    throw ShapeError("dense expects [" + std::to_string(in_) + "] samples, got " + shape_string(input));
  return {out_};
}

Tensor Dense::forward(const Tensor& input, Mode, Rng&) {
  require_rank(input, 2, "dense");
  output_shape(per_sample(input.shape()));
  input_ = input;
  const auto batch = static_cast<Eigen::Index>(input.dim(0));
  const auto in = static_cast<Eigen::Index>(in_);
  const auto out = static_cast<Eigen::Index>(out_);
  Tensor y({input.dim(0), out_});
  ConstMatMap x(input.data(), batch, in);
  ConstMatMap w(weight_.data(), out, in);
  Eigen::Map<const Eigen::RowVectorXd> b(bias_.data(), out);
  MatMap ym(y.data(), batch, out);
  ym.noalias() = x * w.transpose();
  ym.rowwise() += b;
  return y;
}

Tensor Dense::backward(const Tensor& grad_output) {
  const auto batch = static_cast<Eigen::Index>(input_.dim(0));
  const auto in = static_cast<Eigen::Index>(in_);
  const auto out = static_cast<Eigen::Index>(out_);
  ConstMatMap dy(grad_output.data(), batch, out);
  ConstMatMap x(input_.data(), batch, in);
  ConstMatMap w(weight_.data(), out, in);
  MatMap dw(weight_.grad().data(), out, in);
  Eigen::Map<Eigen::RowVectorXd> db(bias_.grad().data(), out);
  dw.noalias() += dy.transpose() * x;
  db += dy.colwise().sum();
  Tensor dx(input_.shape());
  MatMap dxm(dx.data(), batch, in);
  dxm.noalias() = dy * w;
  return dx;
}

nlohmann::json Dense::spec() const { return {{"type", "dense"}, {"in_dim", in_}, {"out_dim", out_}}; }

void Dense::initialize(Rng& rng) {
  glorot_uniform(weight_.values(), in_, out_, rng);
  std::fill(bias_.values().begin(), bias_.values().end(), 0.0);
}

// ---- ReLU / Dropout / LastStep ---------------------------------------------

Tensor ReLU::forward(const Tensor& input, Mode, Rng&) {
  output_ = input;
  for (double& v : output_.values()) v = v > 0.0 ? v : 0.0;
  return output_;
}

Tensor ReLU::backward(const Tensor& grad_output) {
  Tensor g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(output_[i] > 0.0)) g[i] = 0.0;
  return g;
}

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ShapeError("dropout rate must lie in [0, 1)");
}

Tensor Dropout::forward(const Tensor& input, Mode mode, Rng& rng) {
  if (mode == Mode::Eval || rate_ == 0.0) {
    mask_.clear();
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - rate_);
  mask_.resize(input.size());
  Tensor out = input;
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask_[i] = rng.bernoulli(rate_) ? 0.0 : keep_scale;
    out[i] *= mask_[i];
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_output) {
  if (mask_.empty()) return grad_output;
  Tensor g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask_[i];
  return g;
}

Shape LastStep::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[0] == 0) throw ShapeError("last_step expects [T, H] samples, got " + shape_string(input));
  return {input[1]};
}

Tensor LastStep::forward(const Tensor& input, Mode, Rng&) {
  require_rank(input, 3, "last_step");
  input_shape_ = input.shape();
  const std::size_t batch = input.dim(0), steps = input.dim(1), hidden = input.dim(2);
  Tensor out({batch, hidden});
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(input.data() + (b * steps + steps - 1) * hidden, hidden, out.data() + b * hidden);
  return out;
}

Tensor LastStep::backward(const Tensor& grad_output) {
  Tensor g(input_shape_);
  const std::size_t batch = input_shape_[0], steps = input_shape_[1], hidden = input_shape_[2];
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(grad_output.data() + b * hidden, hidden, g.data() + (b * steps + steps - 1) * hidden);
  return g;
}

// ---- Softmax / loss --------------------------------------------------------

SoftmaxLoss softmax_cross_entropy(std::span<const double> logits, int label, double weight) {
  if (logits.empty() || label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw ShapeError("softmax_cross_entropy: label outside logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  SoftmaxLoss r;
  r.probabilities.resize(logits.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    r.probabilities[c] = std::exp(logits[c] - top);
    sum += r.probabilities[c];
  }
  for (double& p : r.probabilities) p /= sum;
  // log p[label] from the shifted logits, accurate even when p underflows.
  const double log_p = logits[static_cast<std::size_t>(label)] - top - std::log(sum);
  r.loss = -weight * log_p;
  return r;
}

double softmax_cross_entropy_batch(const Tensor& logits, std::span<const int> labels, std::span<const double> weights,
                                   Tensor& grad_logits) {
  require_rank(logits, 2, "softmax_cross_entropy");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch || weights.size() != batch) throw ShapeError("loss labels/weights do not match batch");
  grad_logits = Tensor(logits.shape());
  double total = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto r = softmax_cross_entropy(logits.values().subspan(b * classes, classes), labels[b], weights[b]);
    total += r.loss;
    for (std::size_t c = 0; c < classes; ++c) {
      const double onehot = static_cast<int>(c) == labels[b] ? 1.0 : 0.0;
      grad_logits[b * classes + c] = weights[b] * (r.probabilities[c] - onehot) * inv_batch;
    }
  }
  return total * inv_batch;
}

Tensor softmax_rows(const Tensor& logits) {
  require_rank(logits, 2, "softmax");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  Tensor p(logits.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const auto row = logits.values().subspan(b * classes, classes);
    const double top = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      p[b * classes + c] = std::exp(row[c] - top);
      sum += p[b * classes + c];
    }
    for (std::size_t c = 0; c < classes; ++c) p[b * classes + c] /= sum;
  }
  return p;
}

}  // namespace eegbench::nn
