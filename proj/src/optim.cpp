#include "flock/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace flock::nn {

AdamW::AdamW(std::vector<Parameter*> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void AdamW::step() {
  ++step_count_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter* p = params_[pi];
    if (!p->trainable) continue;
    Array& m = m_[pi];
    Array& v = v_[pi];
    for (size_t i = 0; i < p->value.size(); ++i) {
      double g = p->grad.data[i];
      if (!std::isfinite(g))
        throw std::runtime_error("AdamW: non-finite gradient in parameter '" + p->name + "'");
      m.data[i] = config_.beta1 * m.data[i] + (1.0 - config_.beta1) * g;
      v.data[i] = config_.beta2 * v.data[i] + (1.0 - config_.beta2) * g * g;
      double m_hat = m.data[i] / bc1;
      double v_hat = v.data[i] / bc2;
      if (config_.weight_decay != 0.0)
        p->value.data[i] -= config_.lr * config_.weight_decay * p->value.data[i];
      p->value.data[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
  zero_grad();
}

void AdamW::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void AdamW::restore(long step_count, std::vector<Array> m, std::vector<Array> v) {
  if (m.size() != params_.size() || v.size() != params_.size())
    throw std::invalid_argument("AdamW::restore: moment count mismatch");
  step_count_ = step_count;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace flock::nn
