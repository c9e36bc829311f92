// SPDX-License-Identifier: Apache-2.0

#include "asem/embedding.hpp"

#include <cmath>
#include <string>

#include "asem/error.hpp"

namespace asem {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

std::vector<double> row_norms(const Matrix& m, const char* side) {
  std::vector<double> norms(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    norms[r] = std::sqrt(dot(m.row(r), m.row(r)));
    if (norms[r] < kZeroNormThreshold) {
      throw Error(ErrorCode::ZeroNormRow, std::string(side) + " row " + std::to_string(r));
    }
  }
  return norms;
}

}  // namespace

const Matrix& NormalizedRows::value() const {
  if (!ok()) throw Error(ErrorCode::ZeroNormRow, "row " + std::to_string(zero_norm_rows.front()));
  return rows;
}

NormalizedRows l2_normalize_rows(const Matrix& m) {
  if (m.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "normalization needs >= 1 column");
  NormalizedRows out{m, {}};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = out.rows.row(r);
    const double norm = std::sqrt(dot(row, row));
    if (norm < kZeroNormThreshold) {
      out.zero_norm_rows.push_back(r);
      continue;
    }
    for (double& v : row) v /= norm;
  }
  return out;
}

SimilarityMatrix::SimilarityMatrix(Matrix scores) : scores_(std::move(scores)) {
  if (scores_.rows() != scores_.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "similarity matrix must be square, got " +
                                              std::to_string(scores_.rows()) + "x" +
                                              std::to_string(scores_.cols()));
  }
  for (std::size_t i = 0; i < scores_.rows(); ++i) {
    for (std::size_t j = 0; j < scores_.cols(); ++j) {
      const double v = scores_(i, j);
      if (!(std::abs(v) <= 1.0 + kCosineSlack)) {
        throw Error(ErrorCode::OutOfRange, "s(" + std::to_string(i) + "," + std::to_string(j) +
                                               ") = " + std::to_string(v) +
                                               " outside cosine range");
      }
    }
  }
}

SimilarityMatrix cosine_similarity_matrix(const Matrix& audio, const Matrix& text) {
  if (audio.rows() != text.rows() || audio.cols() != text.cols() || audio.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch,
                "audio " + std::to_string(audio.rows()) + "x" + std::to_string(audio.cols()) +
                    " vs text " + std::to_string(text.rows()) + "x" +
                    std::to_string(text.cols()));
  }
  const auto audio_norms = row_norms(audio, "audio");
  const auto text_norms = row_norms(text, "text");
  const std::size_t b = audio.rows();
  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      s(i, j) = dot(audio.row(i), text.row(j)) / (audio_norms[i] * text_norms[j]);
    }
  }
  return SimilarityMatrix(std::move(s));
}

}  // namespace asem
