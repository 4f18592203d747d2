#include "eegbench/neural/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "eegbench/errors.hpp"

namespace eegbench::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using Eigen::Index;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct StepView {
  ConstMatMap w, u;
  Eigen::Map<const Eigen::RowVectorXd> b;
};

StepView view(const RecurrentCell& cell) {
  const auto gh = static_cast<Index>(gate_count(cell.kind) * cell.hidden_dim);
  return {ConstMatMap(cell.w.data(), gh, static_cast<Index>(cell.input_dim)),
          ConstMatMap(cell.u.data(), gh, static_cast<Index>(cell.hidden_dim)),
          Eigen::Map<const Eigen::RowVectorXd>(cell.b.data(), gh)};
}

// One batched step. x [B, D], h_prev/c_prev [B, H]; writes activated gates
// [B, G*H], h [B, H] and, for LSTM, c [B, H].
void step_forward(const RecurrentCell& cell, Index batch, const double* x, const double* h_prev, const double* c_prev,
                  double* gates, double* h, double* c) {
  const auto d = static_cast<Index>(cell.input_dim);
  const auto hd = static_cast<Index>(cell.hidden_dim);
  const auto gh = static_cast<Index>(gate_count(cell.kind)) * hd;
  const auto v = view(cell);
  ConstMatMap xm(x, batch, d);
  ConstMatMap hp(h_prev, batch, hd);
  MatMap g(gates, batch, gh);
  MatMap hm(h, batch, hd);
  g.noalias() = xm * v.w.transpose();
  g.rowwise() += v.b;
  if (cell.kind == CellKind::Gru) {
    g.leftCols(2 * hd).noalias() += hp * v.u.topRows(2 * hd).transpose();
    g.leftCols(2 * hd) = g.leftCols(2 * hd).unaryExpr(&sigmoid);
    const RowMatrix rh = g.middleCols(hd, hd).cwiseProduct(hp);
    g.rightCols(hd).noalias() += rh * v.u.bottomRows(hd).transpose();
    g.rightCols(hd) = g.rightCols(hd).array().tanh();
    const auto z = g.leftCols(hd).array();
    hm = ((1.0 - z) * hp.array() + z * g.rightCols(hd).array()).matrix();
    return;
  }
  ConstMatMap cp(c_prev, batch, hd);
  MatMap cm(c, batch, hd);
  g.noalias() += hp * v.u.transpose();
  g.leftCols(2 * hd) = g.leftCols(2 * hd).unaryExpr(&sigmoid);
  g.middleCols(2 * hd, hd) = g.middleCols(2 * hd, hd).array().tanh();
  g.rightCols(hd) = g.rightCols(hd).unaryExpr(&sigmoid);
  const auto i = g.leftCols(hd).array();
  const auto f = g.middleCols(hd, hd).array();
  const auto gg = g.middleCols(2 * hd, hd).array();
  const auto o = g.rightCols(hd).array();
  cm = (f * cp.array() + i * gg).matrix();
  hm = (o * cm.array().tanh()).matrix();
}

void check_step_dims(const RecurrentCell& cell, std::size_t x, std::size_t h) {
  if (x != cell.input_dim || h != cell.hidden_dim)
    throw ShapeError("recurrent step expects x of size " + std::to_string(cell.input_dim) + " and state of size " +
                     std::to_string(cell.hidden_dim));
}

}  // namespace

std::string_view cell_name(CellKind kind) noexcept { return kind == CellKind::Gru ? "gru" : "lstm"; }

CellKind parse_cell(std::string_view name) {
  if (name == "gru" || name == "GRU") return CellKind::Gru;
  if (name == "lstm" || name == "LSTM") return CellKind::Lstm;
  throw ConfigError("unknown recurrent cell '" + std::string(name) + "'");
}

std::size_t gate_count(CellKind kind) noexcept { return kind == CellKind::Gru ? 3 : 4; }

RecurrentCell::RecurrentCell(CellKind k, std::size_t in, std::size_t hidden)
    : kind(k), input_dim(in), hidden_dim(hidden), w({gate_count(k) * hidden, in}), u({gate_count(k) * hidden, hidden}),
      b({gate_count(k) * hidden}) {
  if (in == 0 || hidden == 0) throw ShapeError("recurrent dimensions must be positive");
  w.enable_grad();
  u.enable_grad();
  b.enable_grad();
}

void RecurrentCell::initialize(Rng& rng) {
  const std::size_t gates = gate_count(kind);
  const std::size_t wblock = hidden_dim * input_dim;
  const std::size_t ublock = hidden_dim * hidden_dim;
  for (std::size_t g = 0; g < gates; ++g) {
    glorot_uniform(w.values().subspan(g * wblock, wblock), input_dim, hidden_dim, rng);
    glorot_uniform(u.values().subspan(g * ublock, ublock), hidden_dim, hidden_dim, rng);
  }
  std::fill(b.values().begin(), b.values().end(), 0.0);
  if (kind == CellKind::Lstm) std::fill_n(b.values().begin() + static_cast<std::ptrdiff_t>(hidden_dim), hidden_dim, 1.0);
}

std::vector<double> gru_step(const RecurrentCell& cell, std::span<const double> x, std::span<const double> h_prev) {
  if (cell.kind != CellKind::Gru) throw ShapeError("gru_step given an LSTM cell");
  check_step_dims(cell, x.size(), h_prev.size());
  std::vector<double> gates(3 * cell.hidden_dim), h(cell.hidden_dim);
  step_forward(cell, 1, x.data(), h_prev.data(), nullptr, gates.data(), h.data(), nullptr);
  return h;
}

LstmState lstm_step(const RecurrentCell& cell, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev) {
  if (cell.kind != CellKind::Lstm) throw ShapeError("lstm_step given a GRU cell");
  check_step_dims(cell, x.size(), h_prev.size());
  check_step_dims(cell, x.size(), c_prev.size());
  std::vector<double> gates(4 * cell.hidden_dim);
  LstmState s{std::vector<double>(cell.hidden_dim), std::vector<double>(cell.hidden_dim)};
  step_forward(cell, 1, x.data(), h_prev.data(), c_prev.data(), gates.data(), s.h.data(), s.c.data());
  return s;
}

Recurrent::Recurrent(CellKind kind, std::size_t input_dim, std::size_t hidden_dim) : cell_(kind, input_dim, hidden_dim) {}

Shape Recurrent::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != cell_.input_dim || input[0] == 0)
    throw ShapeError(std::string(type()) + " expects [T, " + std::to_string(cell_.input_dim) + "] samples, got " +
                     shape_string(input));
  return {input[0], cell_.hidden_dim};
}

Tensor Recurrent::forward(const Tensor& input, Mode, Rng&) {
  if (input.rank() != 3) throw ShapeError(std::string(type()) + " expects a rank-3 batch, got " + shape_string(input.shape()));
  output_shape({input.dim(1), input.dim(2)});
  input_shape_ = input.shape();
  const std::size_t batch = input.dim(0), steps = input.dim(1), d = cell_.input_dim, hd = cell_.hidden_dim;
  const std::size_t gh = gate_count(cell_.kind) * hd;
  const bool lstm = cell_.kind == CellKind::Lstm;
  x_.assign(steps, std::vector<double>(batch * d));
  h_.assign(steps, std::vector<double>(batch * hd));
  gates_.assign(steps, std::vector<double>(batch * gh));
  c_.assign(lstm ? steps : 0, std::vector<double>(batch * hd));
  const std::vector<double> zero(batch * hd, 0.0);
  Tensor out({batch, steps, hd});
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) std::copy_n(input.data() + (b * steps + t) * d, d, x_[t].data() + b * d);
    const double* hp = t ? h_[t - 1].data() : zero.data();
    const double* cp = lstm ? (t ? c_[t - 1].data() : zero.data()) : nullptr;
    step_forward(cell_, static_cast<Index>(batch), x_[t].data(), hp, cp, gates_[t].data(), h_[t].data(),
                 lstm ? c_[t].data() : nullptr);
    for (std::size_t b = 0; b < batch; ++b) std::copy_n(h_[t].data() + b * hd, hd, out.data() + (b * steps + t) * hd);
  }
  return out;
}

Tensor Recurrent::backward(const Tensor& grad_output) {
  const auto batch = static_cast<Index>(input_shape_[0]);
  const std::size_t steps = input_shape_[1];
  const auto d = static_cast<Index>(cell_.input_dim);
  const auto hd = static_cast<Index>(cell_.hidden_dim);
  const auto gh = static_cast<Index>(gate_count(cell_.kind)) * hd;
  const bool lstm = cell_.kind == CellKind::Lstm;
  const auto v = view(cell_);
  MatMap dw(cell_.w.grad().data(), gh, d);
  MatMap du(cell_.u.grad().data(), gh, hd);
  Eigen::Map<Eigen::RowVectorXd> db(cell_.b.grad().data(), gh);

  Tensor grad_in(input_shape_);
  RowMatrix dh = RowMatrix::Zero(batch, hd);  // gradient flowing into h_t from later steps
  RowMatrix dc = RowMatrix::Zero(batch, hd);
  RowMatrix dpre(batch, gh);
  const RowMatrix zero = RowMatrix::Zero(batch, hd);

  for (std::size_t t = steps; t-- > 0;) {
    for (Index b = 0; b < batch; ++b)
      dh.row(b) += Eigen::Map<const Eigen::RowVectorXd>(
          grad_output.data() + (static_cast<std::size_t>(b) * steps + t) * static_cast<std::size_t>(hd), hd);
    ConstMatMap g(gates_[t].data(), batch, gh);
    ConstMatMap x(x_[t].data(), batch, d);
    const RowMatrix hp = t ? RowMatrix(ConstMatMap(h_[t - 1].data(), batch, hd)) : zero;
    RowMatrix dh_prev;

    if (!lstm) {
      const auto z = g.leftCols(hd).array();
      const auto r = g.middleCols(hd, hd).array();
      const auto n = g.rightCols(hd).array();
      const RowMatrix rh = (r * hp.array()).matrix();
      dpre.rightCols(hd) = (dh.array() * z * (1.0 - n * n)).matrix();
      const RowMatrix drh = dpre.rightCols(hd) * v.u.bottomRows(hd);
      dpre.leftCols(hd) = (dh.array() * (n - hp.array()) * z * (1.0 - z)).matrix();
      dpre.middleCols(hd, hd) = (drh.array() * hp.array() * r * (1.0 - r)).matrix();
      du.topRows(2 * hd).noalias() += dpre.leftCols(2 * hd).transpose() * hp;
      du.bottomRows(hd).noalias() += dpre.rightCols(hd).transpose() * rh;
      dh_prev = (dh.array() * (1.0 - z) + drh.array() * r).matrix();
      dh_prev.noalias() += dpre.leftCols(2 * hd) * v.u.topRows(2 * hd);
    } else {
      const auto i = g.leftCols(hd).array();
      const auto f = g.middleCols(hd, hd).array();
      const auto gg = g.middleCols(2 * hd, hd).array();
      const auto o = g.rightCols(hd).array();
      ConstMatMap c(c_[t].data(), batch, hd);
      const RowMatrix cp = t ? RowMatrix(ConstMatMap(c_[t - 1].data(), batch, hd)) : zero;
      const Eigen::ArrayXXd tc = c.array().tanh();
      dc.array() += dh.array() * o * (1.0 - tc * tc);
      dpre.leftCols(hd) = (dc.array() * gg * i * (1.0 - i)).matrix();
      dpre.middleCols(hd, hd) = (dc.array() * cp.array() * f * (1.0 - f)).matrix();
      dpre.middleCols(2 * hd, hd) = (dc.array() * i * (1.0 - gg * gg)).matrix();
      dpre.rightCols(hd) = (dh.array() * tc * o * (1.0 - o)).matrix();
      du.noalias() += dpre.transpose() * hp;
      dh_prev.noalias() = dpre * v.u;
      dc = (dc.array() * f).matrix();
    }

    dw.noalias() += dpre.transpose() * x;
    db += dpre.colwise().sum();
    const RowMatrix dx = dpre * v.w;
    for (Index b = 0; b < batch; ++b)
      Eigen::Map<Eigen::RowVectorXd>(grad_in.data() + (static_cast<std::size_t>(b) * steps + t) * static_cast<std::size_t>(d), d) =
          dx.row(b);
    dh = std::move(dh_prev);
  }
  return grad_in;
}

nlohmann::json Recurrent::spec() const {
  return {{"type", cell_name(cell_.kind)}, {"input_dim", cell_.input_dim}, {"hidden_dim", cell_.hidden_dim}};
}

}  // namespace eegbench::nn
