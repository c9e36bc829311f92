// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "asem/matrix.hpp"

namespace asem {

/// Two linear layers with a ReLU between them:
///   y = relu(x * w1 + b1) * w2 + b2
struct MlpParams {
  Matrix w1;               // d_in x d_hidden
  std::vector<double> b1;  // d_hidden
  Matrix w2;               // d_hidden x d_out
  std::vector<double> b2;  // d_out

  std::size_t d_in() const noexcept { return w1.rows(); }
  std::size_t d_hidden() const noexcept { return w1.cols(); }
  std::size_t d_out() const noexcept { return w2.cols(); }

  /// Zero parameters of the given shape.
  static MlpParams zeros(std::size_t d_in, std::size_t d_hidden, std::size_t d_out);

  /// Parameter tensors in declaration order (w1, b1, w2, b2).
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Gradients share the parameter layout.
using MlpGradients = MlpParams;

struct MlpCache {
  Matrix input;
  Matrix hidden_pre;  // x * w1 + b1
  Matrix hidden;      // relu(hidden_pre)
  std::size_t d_out = 0;
};

/// Throws ShapeMismatch unless x.cols() == params.d_in().
std::pair<Matrix, MlpCache> mlp_forward(const MlpParams& params, const Matrix& x);

/// Exact gradients of a scalar loss given dL/dy. ReLU'(0) = 0.
/// Throws CacheMismatch when grad_y or params disagree with the cache.
std::pair<MlpGradients, Matrix> mlp_backward(const MlpParams& params, const MlpCache& cache,
                                             const Matrix& grad_y);

/// Weights uniform in +-sqrt(6 / fan_in), zero biases; fully seed determined.
MlpParams mlp_init(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                   std::uint64_t seed);

}  // namespace asem
