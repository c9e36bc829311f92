// SPDX-License-Identifier: Apache-2.0

#include "asem/optimizer.hpp"

#include <cmath>
#include <string>

#include "asem/error.hpp"

namespace asem {

AdamState::AdamState(std::span<const std::size_t> tensor_sizes, AdamHyper hyper)
    : hyper_(hyper) {
  for (std::size_t n : tensor_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamState::apply(std::span<const std::span<double>> params,
                      std::span<const std::span<const double>> grads, double lr) {
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer tracks " + std::to_string(m_.size()) +
                                              " tensors, got " + std::to_string(params.size()) +
                                              " params / " + std::to_string(grads.size()) +
                                              " grads");
  }
  for (std::size_t t = 0; t < m_.size(); ++t) {
    if (params[t].size() != m_[t].size() || grads[t].size() != m_[t].size()) {
      throw Error(ErrorCode::ShapeMismatch, "tensor " + std::to_string(t) + " size mismatch");
    }
  }
  ++step_;
  const auto [beta1, beta2, eps] = hyper_;
  const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (std::size_t t = 0; t < m_.size(); ++t) {
    auto& m = m_[t];
    auto& v = v_[t];
    const auto g = grads[t];
    auto p = params[t];
    for (std::size_t k = 0; k < m.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

double lr_at_epoch(const LrSchedule& sched, std::size_t epoch) {
  if (epoch >= sched.total_epochs) {
    throw Error(ErrorCode::EpochOutOfRange, "epoch " + std::to_string(epoch) + " of " +
                                                std::to_string(sched.total_epochs));
  }
  if (sched.decay_every == 0) throw Error(ErrorCode::InvalidConfig, "decay_every must be >= 1");
  const auto decays = static_cast<double>(epoch / sched.decay_every);
  return sched.base_lr * std::pow(sched.decay_factor, decays);
}

}  // namespace asem
