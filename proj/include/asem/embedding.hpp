// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "asem/matrix.hpp"

namespace asem {

/// Rows with a Euclidean norm below this are left untouched by normalization
/// and rejected by the cosine similarity.
inline constexpr double kZeroNormThreshold = 1e-12;
/// Numeric slack admitted around the cosine range [-1, 1].
inline constexpr double kCosineSlack = 1e-9;

struct NormalizedRows {
  Matrix rows;
  /// Indices of rows whose norm fell below kZeroNormThreshold.
  std::vector<std::size_t> zero_norm_rows;

  bool ok() const noexcept { return zero_norm_rows.empty(); }
  /// Throws ZeroNormRow naming the first degenerate row, if any.
  const Matrix& value() const;
};

NormalizedRows l2_normalize_rows(const Matrix& m);

/// Square b x b matrix of cosine scores s(i, j) between audio-side row i and
/// text-side row j.
class SimilarityMatrix {
 public:
  /// Validates squareness and the cosine range.
  explicit SimilarityMatrix(Matrix scores);

  std::size_t batch() const noexcept { return scores_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return scores_(i, j); }
  const Matrix& scores() const noexcept { return scores_; }

  SimilarityMatrix transposed() const { return SimilarityMatrix(scores_.transposed()); }

 private:
  Matrix scores_;
};

/// s(i, j) = <audio_i, text_j> / (|audio_i| |text_j|).
SimilarityMatrix cosine_similarity_matrix(const Matrix& audio, const Matrix& text);

}  // namespace asem
