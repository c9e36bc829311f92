// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "asem/matrix.hpp"

namespace asem {

/// Ownership of captions by audio clips. Every caption belongs to exactly one
/// audio; every audio owns at least one caption.
class RetrievalIndex {
 public:
  /// `text_to_audio[t]` is the audio owning caption t. Throws UnpairedRow
  /// when some audio owns no caption, OutOfRange on a bad audio index.
  RetrievalIndex(std::size_t audio_count, std::vector<std::size_t> text_to_audio);

  /// One caption per audio, caption i owned by audio i.
  static RetrievalIndex one_to_one(std::size_t n);

  std::size_t audio_count() const noexcept { return audio_to_texts_.size(); }
  std::size_t text_count() const noexcept { return text_to_audio_.size(); }
  std::size_t audio_of(std::size_t text) const { return text_to_audio_.at(text); }
  std::span<const std::size_t> texts_of(std::size_t audio) const {
    return audio_to_texts_.at(audio);
  }

 private:
  std::vector<std::size_t> text_to_audio_;
  std::vector<std::vector<std::size_t>> audio_to_texts_;
};

inline constexpr std::array<std::size_t, 3> kRecallCutoffs{1, 5, 10};

struct DirectionRecall {
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;

  std::array<double, 3> values() const noexcept { return {r1, r5, r10}; }
  friend bool operator==(const DirectionRecall&, const DirectionRecall&) = default;
};

struct RecallReport {
  DirectionRecall text_to_audio;
  DirectionRecall audio_to_text;

  friend bool operator==(const RecallReport&, const RecallReport&) = default;
};

/// Recall fractions for a single cutoff.
struct RecallAtK {
  double text_to_audio = 0.0;
  double audio_to_text = 0.0;
};

/// 1 + number of candidates scoring strictly above the best-scoring target.
/// Throws EmptyCandidates when scores or targets are empty, OutOfRange for a
/// target index past the end.
std::size_t rank_of_target(std::span<const double> scores, std::span<const std::size_t> targets);

/// Query ranks for both directions given an audios x texts score matrix.
/// Text-to-audio: one rank per caption. Audio-to-text: best rank over the
/// audio's captions.
struct QueryRanks {
  std::vector<std::size_t> text_to_audio;
  std::vector<std::size_t> audio_to_text;
};
QueryRanks query_ranks(const RetrievalIndex& index, const Matrix& sims);

RecallAtK recall_at_k(const RetrievalIndex& index, const Matrix& sims, std::size_t k);
/// R@1/5/10 both directions, ranking each query once.
RecallReport evaluate_recall(const RetrievalIndex& index, const Matrix& sims);

double sum_of_recalls(const RecallReport& report) noexcept;

/// {t2a R@1, R@5, R@10, a2t R@1, R@5, R@10}.
std::array<double, 6> flatten(const RecallReport& report) noexcept;
RecallReport unflatten(const std::array<double, 6>& values) noexcept;

}  // namespace asem
