#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "eegbench/neural/layers.hpp"

namespace eegbench::nn {

enum class CellKind { Gru, Lstm };

std::string_view cell_name(CellKind kind) noexcept;
CellKind parse_cell(std::string_view name);
/// 3 for GRU (z, r, n), 4 for LSTM (i, f, g, o).
std::size_t gate_count(CellKind kind) noexcept;

/// Gate weights stacked by block: W is [G*H, D], U is [G*H, H], b is [G*H].
/// GRU blocks are ordered z, r, n; LSTM blocks i, f, g, o.
struct RecurrentCell {
  RecurrentCell(CellKind kind, std::size_t input_dim, std::size_t hidden_dim);

  CellKind kind;
  std::size_t input_dim;
  std::size_t hidden_dim;
  Tensor w;
  Tensor u;
  Tensor b;

  std::size_t parameter_count() const noexcept { return w.size() + u.size() + b.size(); }
  /// Glorot per gate block; zero biases except the LSTM forget gate (1).
  void initialize(Rng& rng);
};

/// z = σ(W_z x + U_z h + b_z), r = σ(W_r x + U_r h + b_r),
/// n = tanh(W_n x + U_n (r ⊙ h) + b_n), h' = (1 - z) ⊙ h + z ⊙ n.
std::vector<double> gru_step(const RecurrentCell& cell, std::span<const double> x, std::span<const double> h_prev);

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

/// i, f, o = σ(.), g = tanh(.), c' = f ⊙ c + i ⊙ g, h' = o ⊙ tanh(c').
LstmState lstm_step(const RecurrentCell& cell, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev);

/// Runs a cell over a whole sequence from a zero state: [B, T, D] -> [B, T, H].
/// Backward is full backpropagation through time.
class Recurrent final : public Layer {
 public:
  Recurrent(CellKind kind, std::size_t input_dim, std::size_t hidden_dim);
  std::string_view type() const noexcept override { return cell_name(cell_.kind); }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode, Rng&) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Tensor*> parameters() override { return {&cell_.w, &cell_.u, &cell_.b}; }
  nlohmann::json spec() const override;
  void initialize(Rng& rng) override { cell_.initialize(rng); }

  RecurrentCell& cell() noexcept { return cell_; }
  const RecurrentCell& cell() const noexcept { return cell_; }

 private:
  RecurrentCell cell_;
  Shape input_shape_;
  // Per-step caches, each [B, ...] row-major.
  std::vector<std::vector<double>> x_;      // [B, D]
  std::vector<std::vector<double>> h_;      // [B, H], h_[t] is the state after step t
  std::vector<std::vector<double>> c_;      // LSTM cell state
  std::vector<std::vector<double>> gates_;  // activated gates [B, G*H]
};

}  // namespace eegbench::nn
