#pragma once

#include <vector>

#include "fmlab/core/param_store.hpp"

namespace fmlab {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over the trainable entries of a store.
class Adam {
 public:
  Adam(double learning_rate, AdamConfig config = {});

  void step(ParamStore& params);
  long steps_taken() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_;
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
};

}  // namespace fmlab
