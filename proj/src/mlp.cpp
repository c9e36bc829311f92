// SPDX-License-Identifier: Apache-2.0

#include "asem/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "asem/error.hpp"

namespace asem {

MlpParams MlpParams::zeros(std::size_t d_in, std::size_t d_hidden, std::size_t d_out) {
  return {Matrix(d_in, d_hidden), std::vector<double>(d_hidden, 0.0), Matrix(d_hidden, d_out),
          std::vector<double>(d_out, 0.0)};
}

std::vector<std::span<double>> MlpParams::tensors() {
  return {w1.values(), b1, w2.values(), b2};
}

std::vector<std::span<const double>> MlpParams::tensors() const {
  return {w1.values(), b1, w2.values(), b2};
}

std::pair<Matrix, MlpCache> mlp_forward(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.d_in()) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.cols()) +
                                              " columns, encoder expects " +
                                              std::to_string(params.d_in()));
  }
  MlpCache cache;
  cache.input = x;
  cache.d_out = params.d_out();
  cache.hidden_pre = matmul(x, params.w1);
  cache.hidden = Matrix(x.rows(), params.d_hidden());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto pre = cache.hidden_pre.row(r);
    auto act = cache.hidden.row(r);
    for (std::size_t h = 0; h < pre.size(); ++h) {
      pre[h] += params.b1[h];
      act[h] = pre[h] > 0.0 ? pre[h] : 0.0;
    }
  }
  Matrix y = matmul(cache.hidden, params.w2);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += params.b2[c];
  }
  return {std::move(y), std::move(cache)};
}

std::pair<MlpGradients, Matrix> mlp_backward(const MlpParams& params, const MlpCache& cache,
                                             const Matrix& grad_y) {
  if (grad_y.rows() != cache.input.rows() || grad_y.cols() != cache.d_out) {
    throw Error(ErrorCode::CacheMismatch, "grad_y is " + std::to_string(grad_y.rows()) + "x" +
                                              std::to_string(grad_y.cols()) +
                                              ", forward produced " +
                                              std::to_string(cache.input.rows()) + "x" +
                                              std::to_string(cache.d_out));
  }
  if (params.d_in() != cache.input.cols() || params.d_hidden() != cache.hidden.cols() ||
      params.d_out() != cache.d_out) {
    throw Error(ErrorCode::CacheMismatch, "parameters do not match the cached forward pass");
  }
  MlpGradients grads;
  grads.w2 = matmul_at_b(cache.hidden, grad_y);
  grads.b2.assign(params.d_out(), 0.0);
  for (std::size_t r = 0; r < grad_y.rows(); ++r) {
    const auto row = grad_y.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) grads.b2[c] += row[c];
  }
  Matrix grad_hidden = matmul_a_bt(grad_y, params.w2);
  for (std::size_t r = 0; r < grad_hidden.rows(); ++r) {
    auto g = grad_hidden.row(r);
    const auto pre = cache.hidden_pre.row(r);
    for (std::size_t h = 0; h < g.size(); ++h) {
      if (!(pre[h] > 0.0)) g[h] = 0.0;
    }
  }
  grads.w1 = matmul_at_b(cache.input, grad_hidden);
  grads.b1.assign(params.d_hidden(), 0.0);
  for (std::size_t r = 0; r < grad_hidden.rows(); ++r) {
    const auto row = grad_hidden.row(r);
    for (std::size_t h = 0; h < row.size(); ++h) grads.b1[h] += row[h];
  }
  Matrix grad_x = matmul_a_bt(grad_hidden, params.w1);
  return {std::move(grads), std::move(grad_x)};
}

MlpParams mlp_init(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                   std::uint64_t seed) {
  if (d_in == 0 || d_hidden == 0 || d_out == 0) {
    throw Error(ErrorCode::InvalidConfig, "encoder dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  MlpParams p = MlpParams::zeros(d_in, d_hidden, d_out);
  auto fill = [&rng](Matrix& w, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : w.values()) v = dist(rng);
  };
  fill(p.w1, d_in);
  fill(p.w2, d_hidden);
  return p;
}

}  // namespace asem
