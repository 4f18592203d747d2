#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "eegbench/checks.hpp"
#include "eegbench/neural/layers.hpp"
#include "eegbench/neural/network.hpp"
#include "eegbench/neural/recurrent.hpp"

namespace eegbench::checks {

namespace {

using namespace eegbench::nn;

constexpr double kEps = 1e-5;
constexpr double kGradTolerance = 1e-4;
constexpr int kConfigs = 20;

double rel_error(double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-6); }

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.below(hi - lo + 1)); }

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// Values bounded away from zero so that ReLU kinks are never crossed.
Tensor off_zero_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.05, 1.0);
  return t;
}

// Distinct values spaced 0.1 apart so no window maximum is near a tie.
Tensor spaced_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i) - 0.05 * static_cast<double>(v.size());
  rng.shuffle(std::span<double>(v));
  std::copy(v.begin(), v.end(), t.values().begin());
  return t;
}

struct Worst {
  double error = 0.0;
  std::string where;

  void update(double e, const std::string& label) {
    if (e > error || !std::isfinite(e)) {
      error = std::isfinite(e) ? e : INFINITY;
      where = label;
    }
  }
};

// Checks d(sum(r * f(x)))/d(x) and d/d(params) for one layer. Every forward
// uses a generator with the same seed, so dropout masks repeat.
void check_layer(Layer& layer, Tensor input, Mode mode, Rng& rng, Worst& worst, const std::string& label) {
  const std::uint64_t mask_seed = rng.next();
  auto objective = [&](const Tensor& x) {
    Rng r(mask_seed);
    return layer.forward(x, mode, r);
  };
  const Tensor y = objective(input);
  const Tensor weights = random_tensor(y.shape(), rng);
  auto loss = [&](const Tensor& x) {
    const Tensor out = objective(x);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
    return s;
  };
  for (Tensor* p : layer.parameters()) p->zero_grad();
  objective(input);
  const Tensor dx = layer.backward(weights);

  for (std::size_t i = 0; i < input.size(); ++i) {
    const double orig = input[i];
    input[i] = orig + kEps;
    const double up = loss(input);
    input[i] = orig - kEps;
    const double down = loss(input);
    input[i] = orig;
    worst.update(rel_error(dx[i], (up - down) / (2 * kEps)), label + " input[" + std::to_string(i) + "]");
  }
  const auto params = layer.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + kEps;
      const double up = loss(input);
      p[i] = orig - kEps;
      const double down = loss(input);
      p[i] = orig;
      worst.update(rel_error(analytic[i], (up - down) / (2 * kEps)),
                   label + " param" + std::to_string(k) + "[" + std::to_string(i) + "]");
    }
  }
}

void randomize_parameters(Layer& layer, Rng& rng) {
  layer.initialize(rng);
  for (Tensor* p : layer.parameters())
    for (double& v : p->values()) v += rng.uniform(-0.3, 0.3);
}

// Whole-network check through the softmax cross-entropy loss.
void check_network(Network& net, std::size_t batch, Rng& rng, Worst& worst, const std::string& label) {
  net.initialize(rng.next());
  Shape shape{batch};
  shape.insert(shape.end(), net.input_shape().begin(), net.input_shape().end());
  const Tensor input = random_tensor(shape, rng);
  std::vector<int> labels(batch);
  std::vector<double> weights(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    labels[b] = static_cast<int>(rng.below(net.output_dim()));
    weights[b] = rng.uniform(0.5, 2.0);
  }
  const std::uint64_t mask_seed = rng.next();
  Tensor grad;
  auto loss = [&]() {
    Rng r(mask_seed);
    return softmax_cross_entropy_batch(net.forward(input, Mode::Train, r), labels, weights, grad);
  };
  net.zero_grad();
  loss();
  net.backward(grad);
  const auto params = net.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    // Sample entries of large tensors to keep the check fast.
    const std::size_t stride = std::max<std::size_t>(1, p.size() / 40);
    for (std::size_t i = 0; i < p.size(); i += stride) {
      const double orig = p[i];
      p[i] = orig + kEps;
      const double up = loss();
      p[i] = orig - kEps;
      const double down = loss();
      p[i] = orig;
      worst.update(rel_error(analytic[i], (up - down) / (2 * kEps)),
                   label + " param" + std::to_string(k) + "[" + std::to_string(i) + "]");
    }
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

// Forward-mode dual number for the hand-unrolled oracle.
struct Dual {
  double v = 0.0, d = 0.0;
};
Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual sig(Dual a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return {s, a.d * s * (1.0 - s)};
}
Dual tanh_d(Dual a) {
  const double t = std::tanh(a.v);
  return {t, a.d * (1.0 - t * t)};
}

// Scalar GRU (D = H = 1), 3 steps. p = {Wz, Wr, Wn, Uz, Ur, Un, bz, br, bn}.
Dual gru_unrolled(const std::vector<Dual>& p, const std::vector<Dual>& x, const std::vector<double>& r) {
  Dual h, loss;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const Dual z = sig(p[0] * x[t] + p[3] * h + p[6]);
    const Dual rr = sig(p[1] * x[t] + p[4] * h + p[7]);
    const Dual n = tanh_d(p[2] * x[t] + p[5] * (rr * h) + p[8]);
    h = (Dual{1.0, 0.0} - z) * h + z * n;
    loss = loss + Dual{r[t], 0.0} * h;
  }
  return loss;
}

// Scalar LSTM, 3 steps. p = {Wi, Wf, Wg, Wo, Ui, Uf, Ug, Uo, bi, bf, bg, bo}.
Dual lstm_unrolled(const std::vector<Dual>& p, const std::vector<Dual>& x, const std::vector<double>& r) {
  Dual h, c, loss;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const Dual i = sig(p[0] * x[t] + p[4] * h + p[8]);
    const Dual f = sig(p[1] * x[t] + p[5] * h + p[9]);
    const Dual g = tanh_d(p[2] * x[t] + p[6] * h + p[10]);
    const Dual o = sig(p[3] * x[t] + p[7] * h + p[11]);
    c = f * c + i * g;
    h = o * tanh_d(c);
    loss = loss + Dual{r[t], 0.0} * h;
  }
  return loss;
}

}  // namespace

CheckResult gradient_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::string, Worst>> per_type;
  auto run = [&](const std::string& type, const std::function<void(Worst&, const std::string&)>& body) {
    Worst w;
    for (int c = 0; c < kConfigs; ++c) body(w, type + " config " + std::to_string(c));
    per_type.emplace_back(type, w);
  };

  run("conv1d", [&](Worst& w, const std::string& label) {
    const std::size_t c = pick(rng, 1, 3), o = pick(rng, 1, 3), k = pick(rng, 1, 4), len = k + pick(rng, 0, 6);
    Conv1D layer(c, o, k);
    randomize_parameters(layer, rng);
    check_layer(layer, random_tensor({pick(rng, 1, 3), c, len}, rng), Mode::Train, rng, w, label);
  });
  run("maxpool1d", [&](Worst& w, const std::string& label) {
    const std::size_t window = pick(rng, 1, 3);
    MaxPool1D layer(window);
    check_layer(layer, spaced_tensor({pick(rng, 1, 3), pick(rng, 1, 3), window + pick(rng, 0, 7)}, rng), Mode::Train, rng, w,
                label);
  });
  run("dense", [&](Worst& w, const std::string& label) {
    const std::size_t in = pick(rng, 1, 6), out = pick(rng, 1, 6);
    Dense layer(in, out);
    randomize_parameters(layer, rng);
    check_layer(layer, random_tensor({pick(rng, 1, 4), in}, rng), Mode::Train, rng, w, label);
  });
  run("relu", [&](Worst& w, const std::string& label) {
    ReLU layer;
    check_layer(layer, off_zero_tensor({pick(rng, 1, 4), pick(rng, 1, 8)}, rng), Mode::Train, rng, w, label);
  });
  run("dropout", [&](Worst& w, const std::string& label) {
    Dropout layer(rng.uniform(0.0, 0.8));
    check_layer(layer, random_tensor({pick(rng, 1, 4), pick(rng, 1, 8)}, rng), Mode::Train, rng, w, label);
  });
  run("reshape", [&](Worst& w, const std::string& label) {
    const std::size_t a = pick(rng, 1, 4), b = pick(rng, 1, 4);
    Reshape layer({b, a});
    check_layer(layer, random_tensor({pick(rng, 1, 3), a * b}, rng), Mode::Train, rng, w, label);
  });
  run("last_step", [&](Worst& w, const std::string& label) {
    LastStep layer;
    check_layer(layer, random_tensor({pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 4)}, rng), Mode::Train, rng, w, label);
  });
  for (CellKind kind : {CellKind::Gru, CellKind::Lstm}) {
    run(std::string(cell_name(kind)), [&](Worst& w, const std::string& label) {
      const std::size_t d = pick(rng, 1, 3), h = pick(rng, 1, 4);
      Recurrent layer(kind, d, h);
      randomize_parameters(layer, rng);
      check_layer(layer, random_tensor({pick(rng, 1, 3), pick(rng, 1, 5), d}, rng), Mode::Train, rng, w, label);
    });
  }
  run("softmax_cross_entropy", [&](Worst& w, const std::string& label) {
    const std::size_t in = pick(rng, 1, 4), out = pick(rng, 2, 5);
    std::vector<std::unique_ptr<Layer>> layers;
    layers.push_back(std::make_unique<Dense>(in, out));
    Network net({in}, std::move(layers));
    check_network(net, pick(rng, 1, 4), rng, w, label);
  });
  run("cnn_network", [&](Worst& w, const std::string& label) {
    Network net = build_cnn(static_cast<int>(pick(rng, 2, 5)), pick(rng, 2, 4), pick(rng, 2, 3), pick(rng, 18, 26));
    check_network(net, pick(rng, 1, 2), rng, w, label);
  });
  for (CellKind kind : {CellKind::Gru, CellKind::Lstm}) {
    run(std::string(cell_name(kind)) + "_network", [&](Worst& w, const std::string& label) {
      Network net = build_rnn(kind, static_cast<int>(pick(rng, 2, 5)), pick(rng, 2, 5));
      check_network(net, pick(rng, 1, 2), rng, w, label);
    });
  }

  CheckResult r{"gradient_checks", true, ""};
  std::ostringstream detail;
  for (const auto& [type, w] : per_type) {
    const bool ok = w.error < kGradTolerance;
    r.passed = r.passed && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << type << " " << fmt(w.error) << (ok ? "" : " FAIL at " + w.where);
  }
  r.detail = "max relative error per type (" + std::to_string(kConfigs) + " configs each): " + detail.str();
  return r;
}

CheckResult bptt_oracle(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (CellKind kind : {CellKind::Gru, CellKind::Lstm}) {
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t gates = gate_count(kind);
      Recurrent layer(kind, 1, 1);
      RecurrentCell& cell = layer.cell();
      for (Tensor* p : layer.parameters())
        for (double& v : p->values()) v = rng.uniform(-1.5, 1.5);
      std::vector<double> x(3), r(3);
      for (auto& v : x) v = rng.uniform(-1, 1);
      for (auto& v : r) v = rng.uniform(-1, 1);

      Rng unused(0);
      const Tensor input({1, 3, 1}, x);
      layer.forward(input, Mode::Train, unused);
      for (Tensor* p : layer.parameters()) p->zero_grad();
      const Tensor dx = layer.backward(Tensor({1, 3, 1}, r));

      // Oracle parameter order: all W, all U, all b.
      std::vector<double> flat, analytic;
      for (Tensor* p : {&cell.w, &cell.u, &cell.b}) {
        flat.insert(flat.end(), p->values().begin(), p->values().end());
        analytic.insert(analytic.end(), p->grad().begin(), p->grad().end());
      }
      const std::size_t np = 3 * gates;
      for (std::size_t seed_at = 0; seed_at < np + 3; ++seed_at) {
        std::vector<Dual> p(np), xs(3);
        for (std::size_t i = 0; i < np; ++i) p[i] = {flat[i], i == seed_at ? 1.0 : 0.0};
        for (std::size_t t = 0; t < 3; ++t) xs[t] = {x[t], np + t == seed_at ? 1.0 : 0.0};
        const Dual l = kind == CellKind::Gru ? gru_unrolled(p, xs, r) : lstm_unrolled(p, xs, r);
        const double a = seed_at < np ? analytic[seed_at] : dx[seed_at - np];
        worst = std::max(worst, std::abs(a - l.d));
      }
    }
  }
  return {"bptt_oracle", worst <= 1e-10, "max |analytic - unrolled| over GRU and LSTM, 3 steps: " + fmt(worst)};
}

CheckResult softmax_stability(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t b = pick(rng, 1, 4), c = pick(rng, 2, 10);
    const Tensor p = softmax_rows(random_tensor({b, c}, rng, 100.0));
    for (std::size_t i = 0; i < b; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += p[i * c + j];
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  return {"softmax_stability", worst <= 1e-9, "max |sum - 1| for logits in [-100, 100]: " + fmt(worst)};
}

CheckResult dropout_expectation(std::uint64_t seed) {
  Rng rng(seed);
  constexpr int kMasks = 10000;
  constexpr double rate = 0.5;
  const Tensor x = off_zero_tensor({1, 8}, rng);
  Dropout layer(rate);
  std::vector<double> mean(x.size(), 0.0);
  for (int m = 0; m < kMasks; ++m) {
    const Tensor y = layer.forward(x, Mode::Train, rng);
    for (std::size_t i = 0; i < x.size(); ++i) mean[i] += y[i] / kMasks;
  }
  const Tensor eval = layer.forward(x, Mode::Eval, rng);
  double worst_z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Per-mask output is x/(1-rate) w.p. 1-rate, else 0.
    const double sd = std::abs(x[i]) * std::sqrt(rate / (1.0 - rate)) / std::sqrt(static_cast<double>(kMasks));
    worst_z = std::max(worst_z, std::abs(mean[i] - eval[i]) / sd);
  }
  return {"dropout_expectation", worst_z <= 3.0, "largest deviation " + fmt(worst_z) + " sigma over 1e4 masks"};
}

}  // namespace eegbench::checks
