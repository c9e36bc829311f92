// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "asem/embedding.hpp"
#include "asem/matrix.hpp"

namespace asem {

struct TripletConfig {
  double margin = 0.2;
};

struct NtXentConfig {
  double temperature = 0.07;
};

/// Positive and negative weighting polynomials, coefficients in ascending
/// order of power: pos[p] multiplies s^p.
struct PolynomialWeights {
  std::vector<double> pos{0.5, -0.7, 0.2};
  std::vector<double> neg{0.03, -0.4, 0.9};

  std::size_t pos_order() const noexcept { return pos.empty() ? 0 : pos.size() - 1; }
  std::size_t neg_order() const noexcept { return neg.empty() ? 0 : neg.size() - 1; }
};

struct LossResult {
  double value = 0.0;
  /// dL/ds, same shape as the similarity matrix.
  Matrix grad_s;
};

/// Horner evaluation of sum_k coeffs[k] * x^k.
double polynomial(std::span<const double> coeffs, double x) noexcept;
/// d/dx of polynomial(coeffs, x).
double polynomial_derivative(std::span<const double> coeffs, double x) noexcept;

double g_pos(double s_pos, const PolynomialWeights& w) noexcept;
double g_neg(double s_neg, const PolynomialWeights& w) noexcept;

/// Hinge ranking loss summed over every in-batch negative, both directions.
LossResult triplet_sum(const SimilarityMatrix& s, const TripletConfig& cfg = {});
/// Hinge ranking loss against the hardest negative per anchor, both
/// directions. Ties go to the lowest index.
LossResult triplet_max(const SimilarityMatrix& s, const TripletConfig& cfg = {});
/// Maximum polynomial loss: hinge of g_pos(positive) + g_neg(hardest
/// negative), both directions. Throws BatchTooSmall for b < 2.
LossResult triplet_weighted(const SimilarityMatrix& s, const PolynomialWeights& w = {});
/// Bidirectional softmax cross entropy over temperature-scaled scores.
LossResult nt_xent(const SimilarityMatrix& s, const NtXentConfig& cfg = {});

enum class Objective { TripletSum, TripletMax, TripletWeighted, NtXent };

inline constexpr Objective kAllObjectives[] = {Objective::TripletSum, Objective::TripletMax,
                                               Objective::TripletWeighted, Objective::NtXent};

std::string_view to_string(Objective objective) noexcept;
/// Accepts "triplet-sum", "triplet-max", "triplet-weighted", "nt-xent".
std::optional<Objective> parse_objective(std::string_view name) noexcept;

/// Hyper-parameters for every objective; only the selected one is read.
struct ObjectiveConfig {
  TripletConfig triplet;
  NtXentConfig nt_xent;
  PolynomialWeights weights;
};

LossResult evaluate_objective(Objective objective, const SimilarityMatrix& s,
                              const ObjectiveConfig& cfg);

/// Chain rule from dL/ds through the cosine similarity and the row
/// normalization back to the raw (unnormalized) embeddings. `*_norm` must be
/// the row-normalized versions of `*_raw`.
std::pair<Matrix, Matrix> backprop_to_embeddings(const Matrix& grad_s, const Matrix& audio_norm,
                                                 const Matrix& text_norm, const Matrix& audio_raw,
                                                 const Matrix& text_raw);

}  // namespace asem
