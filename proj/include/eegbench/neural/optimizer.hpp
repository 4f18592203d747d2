#pragma once

#include <vector>

#include "eegbench/neural/tensor.hpp"

namespace eegbench::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments. Reads each parameter's accumulated
/// gradient; does not zero it.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamConfig config = {});
  void step();
  long steps_taken() const noexcept { return t_; }

 private:
  std::vector<Tensor*> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace eegbench::nn
