#include "fmlab/optim.hpp"

#include <cmath>

#include "fmlab/core/errors.hpp"

namespace fmlab {

Adam::Adam(double learning_rate, AdamConfig config) : lr_(learning_rate), cfg_(config) {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0) || !(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(cfg_.eps > 0.0)) throw ConfigError("adam eps must be > 0");
}

void Adam::step(ParamStore& params) {
  auto& entries = params.entries();
  if (m_.empty()) {
    for (const auto& e : entries) {
      m_.push_back(Mat::Zero(e.value.rows(), e.value.cols()));
      v_.push_back(Mat::Zero(e.value.rows(), e.value.cols()));
    }
  }
  if (m_.size() != entries.size()) throw Error("adam: parameter set changed between steps");
  ++t_;
  if (lr_ == 0.0) return;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    if (!e.trainable) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * e.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * e.grad.cwiseAbs2();
    const auto mhat = m_[i].array() / c1;
    const auto vhat = v_[i].array() / c2;
    e.value.array() -= lr_ * mhat / (vhat.sqrt() + cfg_.eps);
  }
}

}  // namespace fmlab
