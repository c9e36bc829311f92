// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace asem {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators for a fixed list of parameter tensors.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<const std::size_t> tensor_sizes, AdamHyper hyper = {});

  std::uint64_t step() const noexcept { return step_; }
  const AdamHyper& hyper() const noexcept { return hyper_; }
  std::span<const double> first_moment(std::size_t tensor) const { return m_.at(tensor); }
  std::span<const double> second_moment(std::size_t tensor) const { return v_.at(tensor); }
  std::size_t tensor_count() const noexcept { return m_.size(); }

  /// One bias-corrected Adam update applied in place. Throws ShapeMismatch
  /// when the tensor list does not match the state, InvalidConfig for lr <= 0.
  void apply(std::span<const std::span<double>> params,
             std::span<const std::span<const double>> grads, double lr);

 private:
  AdamHyper hyper_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Step decay: base_lr * decay_factor ^ floor(epoch / decay_every).
struct LrSchedule {
  double base_lr = 1e-4;
  double decay_factor = 0.1;
  std::size_t decay_every = 20;
  std::size_t total_epochs = 50;
};

/// Throws EpochOutOfRange unless 0 <= epoch < total_epochs.
double lr_at_epoch(const LrSchedule& sched, std::size_t epoch);

}  // namespace asem
