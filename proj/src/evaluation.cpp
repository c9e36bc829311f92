// SPDX-License-Identifier: Apache-2.0

#include "asem/evaluation.hpp"

#include <string>

#include "asem/error.hpp"

namespace asem {
namespace {

double hit_fraction(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : ranks) hits += r <= k ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

void check_shape(const RetrievalIndex& index, const Matrix& sims) {
  if (sims.rows() != index.audio_count() || sims.cols() != index.text_count()) {
    throw Error(ErrorCode::ShapeMismatch,
                "scores are " + std::to_string(sims.rows()) + "x" + std::to_string(sims.cols()) +
                    ", index expects " + std::to_string(index.audio_count()) + " audios x " +
                    std::to_string(index.text_count()) + " texts");
  }
}

}  // namespace

RetrievalIndex::RetrievalIndex(std::size_t audio_count, std::vector<std::size_t> text_to_audio)
    : text_to_audio_(std::move(text_to_audio)), audio_to_texts_(audio_count) {
  for (std::size_t t = 0; t < text_to_audio_.size(); ++t) {
    const std::size_t a = text_to_audio_[t];
    if (a >= audio_count) {
      throw Error(ErrorCode::OutOfRange, "text " + std::to_string(t) + " owned by audio " +
                                             std::to_string(a) + " of " +
                                             std::to_string(audio_count));
    }
    audio_to_texts_[a].push_back(t);
  }
  for (std::size_t a = 0; a < audio_count; ++a) {
    if (audio_to_texts_[a].empty()) {
      throw Error(ErrorCode::UnpairedRow, "audio " + std::to_string(a) + " owns no caption");
    }
  }
}

RetrievalIndex RetrievalIndex::one_to_one(std::size_t n) {
  std::vector<std::size_t> owners(n);
  for (std::size_t i = 0; i < n; ++i) owners[i] = i;
  return RetrievalIndex(n, std::move(owners));
}

std::size_t rank_of_target(std::span<const double> scores, std::span<const std::size_t> targets) {
  if (scores.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidates to rank");
  if (targets.empty()) throw Error(ErrorCode::EmptyCandidates, "no target to rank");
  double best = 0.0;
  for (std::size_t n = 0; n < targets.size(); ++n) {
    if (targets[n] >= scores.size()) {
      throw Error(ErrorCode::OutOfRange, "target " + std::to_string(targets[n]) + " of " +
                                             std::to_string(scores.size()) + " candidates");
    }
    const double v = scores[targets[n]];
    if (n == 0 || v > best) best = v;
  }
  std::size_t above = 0;
  for (double v : scores) above += v > best ? 1 : 0;
  return above + 1;
}

QueryRanks query_ranks(const RetrievalIndex& index, const Matrix& sims) {
  check_shape(index, sims);
  QueryRanks ranks;
  ranks.text_to_audio.reserve(index.text_count());
  std::vector<double> column(index.audio_count());
  for (std::size_t t = 0; t < index.text_count(); ++t) {
    for (std::size_t a = 0; a < index.audio_count(); ++a) column[a] = sims(a, t);
    const std::size_t target = index.audio_of(t);
    ranks.text_to_audio.push_back(rank_of_target(column, std::span(&target, 1)));
  }
  ranks.audio_to_text.reserve(index.audio_count());
  for (std::size_t a = 0; a < index.audio_count(); ++a) {
    ranks.audio_to_text.push_back(rank_of_target(sims.row(a), index.texts_of(a)));
  }
  return ranks;
}

RecallAtK recall_at_k(const RetrievalIndex& index, const Matrix& sims, std::size_t k) {
  const QueryRanks ranks = query_ranks(index, sims);
  return {hit_fraction(ranks.text_to_audio, k), hit_fraction(ranks.audio_to_text, k)};
}

RecallReport evaluate_recall(const RetrievalIndex& index, const Matrix& sims) {
  const QueryRanks ranks = query_ranks(index, sims);
  auto direction = [](std::span<const std::size_t> r) {
    return DirectionRecall{hit_fraction(r, 1), hit_fraction(r, 5), hit_fraction(r, 10)};
  };
  return {direction(ranks.text_to_audio), direction(ranks.audio_to_text)};
}

double sum_of_recalls(const RecallReport& report) noexcept {
  double total = 0.0;
  for (double v : flatten(report)) total += v;
  return total;
}

std::array<double, 6> flatten(const RecallReport& report) noexcept {
  const auto& t = report.text_to_audio;
  const auto& a = report.audio_to_text;
  return {t.r1, t.r5, t.r10, a.r1, a.r5, a.r10};
}

RecallReport unflatten(const std::array<double, 6>& v) noexcept {
  return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

}  // namespace asem
