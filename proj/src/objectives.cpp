// SPDX-License-Identifier: Apache-2.0

#include "asem/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asem/error.hpp"

namespace asem {
namespace {

// Index of the largest off-diagonal entry in row `i` (by_row) or column `i`,
// lowest index on ties. Requires b >= 2.
std::size_t hardest_negative(const SimilarityMatrix& s, std::size_t i, bool by_row) {
  const std::size_t b = s.batch();
  std::size_t best = i == 0 ? 1 : 0;
  double best_score = by_row ? s(i, best) : s(best, i);
  for (std::size_t j = best + 1; j < b; ++j) {
    if (j == i) continue;
    const double v = by_row ? s(i, j) : s(j, i);
    if (v > best_score) {
      best_score = v;
      best = j;
    }
  }
  return best;
}

}  // namespace

double polynomial(std::span<const double> coeffs, double x) noexcept {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double polynomial_derivative(std::span<const double> coeffs, double x) noexcept {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * coeffs[k];
  return acc;
}

double g_pos(double s_pos, const PolynomialWeights& w) noexcept { return polynomial(w.pos, s_pos); }
double g_neg(double s_neg, const PolynomialWeights& w) noexcept { return polynomial(w.neg, s_neg); }

LossResult triplet_sum(const SimilarityMatrix& s, const TripletConfig& cfg) {
  const std::size_t b = s.batch();
  const double inv_b = 1.0 / static_cast<double>(b);
  LossResult out{0.0, Matrix(b, b)};
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      const double to_text = cfg.margin + s(i, j) - s(i, i);
      const double to_audio = cfg.margin + s(j, i) - s(i, i);
      if (to_text > 0.0) {
        total += to_text;
        out.grad_s(i, j) += inv_b;
        out.grad_s(i, i) -= inv_b;
      }
      if (to_audio > 0.0) {
        total += to_audio;
        out.grad_s(j, i) += inv_b;
        out.grad_s(i, i) -= inv_b;
      }
    }
  }
  out.value = total * inv_b;
  return out;
}

LossResult triplet_max(const SimilarityMatrix& s, const TripletConfig& cfg) {
  const std::size_t b = s.batch();
  LossResult out{0.0, Matrix(b, b)};
  if (b < 2) return out;
  const double inv_b = 1.0 / static_cast<double>(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t j = hardest_negative(s, i, true);
    const double to_text = cfg.margin + s(i, j) - s(i, i);
    if (to_text > 0.0) {
      total += to_text;
      out.grad_s(i, j) += inv_b;
      out.grad_s(i, i) -= inv_b;
    }
    const std::size_t k = hardest_negative(s, i, false);
    const double to_audio = cfg.margin + s(k, i) - s(i, i);
    if (to_audio > 0.0) {
      total += to_audio;
      out.grad_s(k, i) += inv_b;
      out.grad_s(i, i) -= inv_b;
    }
  }
  out.value = total * inv_b;
  return out;
}

LossResult triplet_weighted(const SimilarityMatrix& s, const PolynomialWeights& w) {
  const std::size_t b = s.batch();
  if (b < 2) {
    throw Error(ErrorCode::BatchTooSmall,
                "weighted loss needs a hardest negative, batch is " + std::to_string(b));
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  LossResult out{0.0, Matrix(b, b)};
  double audio_terms = 0.0;
  double text_terms = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double pos = s(i, i);
    const std::size_t j = hardest_negative(s, i, true);
    const double audio_bracket = g_pos(pos, w) + g_neg(s(i, j), w);
    if (audio_bracket > 0.0) {
      audio_terms += audio_bracket;
      out.grad_s(i, i) += inv_b * polynomial_derivative(w.pos, pos);
      out.grad_s(i, j) += inv_b * polynomial_derivative(w.neg, s(i, j));
    }
    const std::size_t k = hardest_negative(s, i, false);
    const double text_bracket = g_pos(pos, w) + g_neg(s(k, i), w);
    if (text_bracket > 0.0) {
      text_terms += text_bracket;
      out.grad_s(i, i) += inv_b * polynomial_derivative(w.pos, pos);
      out.grad_s(k, i) += inv_b * polynomial_derivative(w.neg, s(k, i));
    }
  }
  out.value = audio_terms * inv_b + text_terms * inv_b;
  return out;
}

LossResult nt_xent(const SimilarityMatrix& s, const NtXentConfig& cfg) {
  if (!(cfg.temperature > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "temperature must be > 0");
  }
  const std::size_t b = s.batch();
  const double inv_b = 1.0 / static_cast<double>(b);
  const double inv_tau = 1.0 / cfg.temperature;
  LossResult out{0.0, Matrix(b, b)};
  std::vector<double> shifted(b);

  // One softmax per anchor: by_row selects row i (audio anchor) or column i
  // (text anchor). Returns log p(positive) and accumulates the gradient.
  auto softmax_term = [&](std::size_t i, bool by_row) {
    double max_z = -INFINITY;
    for (std::size_t j = 0; j < b; ++j) {
      shifted[j] = (by_row ? s(i, j) : s(j, i)) * inv_tau;
      max_z = std::max(max_z, shifted[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      shifted[j] = std::exp(shifted[j] - max_z);
      denom += shifted[j];
    }
    const double log_prob = (s(i, i) * inv_tau - max_z) - std::log(denom);
    const double scale = inv_b * inv_tau;
    for (std::size_t j = 0; j < b; ++j) {
      const double g = scale * (shifted[j] / denom);
      if (by_row) {
        out.grad_s(i, j) += g;
      } else {
        out.grad_s(j, i) += g;
      }
    }
    out.grad_s(i, i) -= scale;
    return log_prob;
  };

  double audio_sum = 0.0;
  double text_sum = 0.0;
  for (std::size_t i = 0; i < b; ++i) audio_sum += softmax_term(i, true);
  for (std::size_t i = 0; i < b; ++i) text_sum += softmax_term(i, false);
  out.value = -(audio_sum + text_sum) * inv_b;
  return out;
}

std::string_view to_string(Objective objective) noexcept {
  switch (objective) {
    case Objective::TripletSum: return "triplet-sum";
    case Objective::TripletMax: return "triplet-max";
    case Objective::TripletWeighted: return "triplet-weighted";
    case Objective::NtXent: return "nt-xent";
  }
  return "unknown";
}

std::optional<Objective> parse_objective(std::string_view name) noexcept {
  for (Objective o : kAllObjectives) {
    if (to_string(o) == name) return o;
  }
  return std::nullopt;
}

LossResult evaluate_objective(Objective objective, const SimilarityMatrix& s,
                              const ObjectiveConfig& cfg) {
  switch (objective) {
    case Objective::TripletSum: return triplet_sum(s, cfg.triplet);
    case Objective::TripletMax: return triplet_max(s, cfg.triplet);
    case Objective::TripletWeighted: return triplet_weighted(s, cfg.weights);
    case Objective::NtXent: return nt_xent(s, cfg.nt_xent);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown objective");
}

namespace {

// dL/dx = (g - x_hat <x_hat, g>) / |x| for x_hat = x / |x|.
Matrix through_normalization(const Matrix& grad_norm, const Matrix& normed, const Matrix& raw,
                             const char* side) {
  Matrix out(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const auto x = raw.row(r);
    const auto u = normed.row(r);
    const auto g = grad_norm.row(r);
    double norm_sq = 0.0;
    double radial = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      norm_sq += x[k] * x[k];
      radial += u[k] * g[k];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < kZeroNormThreshold) {
      throw Error(ErrorCode::ZeroNormRow, std::string(side) + " row " + std::to_string(r));
    }
    auto dst = out.row(r);
    for (std::size_t k = 0; k < x.size(); ++k) dst[k] = (g[k] - u[k] * radial) / norm;
  }
  return out;
}

}  // namespace

std::pair<Matrix, Matrix> backprop_to_embeddings(const Matrix& grad_s, const Matrix& audio_norm,
                                                 const Matrix& text_norm, const Matrix& audio_raw,
                                                 const Matrix& text_raw) {
  const std::size_t b = grad_s.rows();
  const bool ok = grad_s.cols() == b && audio_norm.rows() == b && text_norm.rows() == b &&
                  audio_raw.rows() == b && text_raw.rows() == b &&
                  audio_norm.cols() == text_norm.cols() && audio_raw.cols() == audio_norm.cols() &&
                  text_raw.cols() == text_norm.cols();
  if (!ok) throw Error(ErrorCode::ShapeMismatch, "backprop_to_embeddings operand shapes");
  const Matrix grad_audio_norm = matmul(grad_s, text_norm);
  const Matrix grad_text_norm = matmul_at_b(grad_s, audio_norm);
  return {through_normalization(grad_audio_norm, audio_norm, audio_raw, "audio"),
          through_normalization(grad_text_norm, text_norm, text_raw, "text")};
}

}  // namespace asem
