#pragma once

#include <vector>

#include "flock/tensor.hpp"

namespace flock::nn {

// Adam with decoupled weight decay. The decay multiplies parameters by
// (1 - lr*wd) independently of the adaptive step.
struct AdamWConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, AdamWConfig config);

  // Applies one update from the accumulated grads, then zeroes them.
  // Throws on non-finite gradients, naming the parameter.
  void step();
  void zero_grad();

  long step_count() const { return step_count_; }
  const AdamWConfig& config() const { return config_; }
  AdamWConfig& config() { return config_; }
  const std::vector<Parameter*>& params() const { return params_; }

  // Moment buffers for checkpointing.
  const std::vector<Array>& first_moments() const { return m_; }
  const std::vector<Array>& second_moments() const { return v_; }
  void restore(long step_count, std::vector<Array> m, std::vector<Array> v);

 private:
  std::vector<Parameter*> params_;
  AdamWConfig config_;
  std::vector<Array> m_, v_;
  long step_count_ = 0;
};

}  // namespace flock::nn
