// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "asem/error.hpp"
#include "asem/evaluation.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asem;

namespace {

RetrievalIndex grouped(std::size_t audios, std::size_t captions_each) {
  std::vector<std::size_t> owner;
  for (std::size_t a = 0; a < audios; ++a)
    for (std::size_t c = 0; c < captions_each; ++c) owner.push_back(a);
  return RetrievalIndex(audios, owner);
}

// Recall@k straight from full sorts of each query's candidate list.
RecallAtK sorted_recall(const RetrievalIndex& index, const Matrix& sims, std::size_t k) {
  std::size_t t2a_hits = 0, a2t_hits = 0;
  for (std::size_t t = 0; t < index.text_count(); ++t) {
    std::vector<double> column(index.audio_count());
    for (std::size_t a = 0; a < index.audio_count(); ++a) column[a] = sims(a, t);
    t2a_hits += oracle::sorted_rank(column, {index.audio_of(t)}) <= k;
  }
  for (std::size_t a = 0; a < index.audio_count(); ++a) {
    const auto row = sims.row(a);
    const auto owned = index.texts_of(a);
    a2t_hits += oracle::sorted_rank({row.begin(), row.end()}, {owned.begin(), owned.end()}) <= k;
  }
  return {static_cast<double>(t2a_hits) / static_cast<double>(index.text_count()),
          static_cast<double>(a2t_hits) / static_cast<double>(index.audio_count())};
}

}  // namespace

TEST_CASE("rank_of_target") {
  const std::vector<double> unique{0.1, 0.9, 0.3};
  const std::vector<std::size_t> t1{1};
  CHECK(rank_of_target(unique, t1) == 1);
  const std::vector<double> flat(5, 0.4);
  const std::vector<std::size_t> t3{3};
  CHECK(rank_of_target(flat, t3) == 1);
  const std::vector<double> s{0.9, 0.2, 0.5};
  const std::vector<std::size_t> t2{2};
  CHECK(rank_of_target(s, t2) == 2);
  const std::vector<std::size_t> several{1, 2};
  CHECK(rank_of_target(s, several) == 2);
  CHECK_THROWS_AS(rank_of_target({}, t1), Error);
  try {
    rank_of_target(s, {});
    FAIL("expected EmptyCandidates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCandidates);
  }
  const std::vector<std::size_t> past{3};
  CHECK_THROWS_AS(rank_of_target(s, past), Error);
}

TEST_CASE("retrieval index") {
  const auto idx = grouped(3, 2);
  CHECK(idx.audio_count() == 3);
  CHECK(idx.text_count() == 6);
  CHECK(idx.audio_of(3) == 1);
  CHECK(idx.texts_of(2).size() == 2);
  try {
    RetrievalIndex(3, {0, 0, 1});
    FAIL("expected UnpairedRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnpairedRow);
  }
  CHECK_THROWS_AS(RetrievalIndex(2, {0, 2}), Error);
}

TEST_CASE("recall examples") {
  SUBCASE("identity-dominant") {
    Matrix sims(4, 4);
    for (std::size_t i = 0; i < 4; ++i) sims(i, i) = 1.0;
    const auto r = evaluate_recall(RetrievalIndex::one_to_one(4), sims);
    CHECK(r.text_to_audio == DirectionRecall{1, 1, 1});
    CHECK(r.audio_to_text == DirectionRecall{1, 1, 1});
    CHECK(sum_of_recalls(r) == 6.0);
  }
  SUBCASE("both targets ranked second") {
    const Matrix sims{{0.2, 0.9}, {0.8, 0.1}};
    const auto idx = RetrievalIndex::one_to_one(2);
    CHECK(recall_at_k(idx, sims, 1).text_to_audio == 0.0);
    CHECK(recall_at_k(idx, sims, 2).text_to_audio == 1.0);
    CHECK(recall_at_k(idx, sims, 1).audio_to_text == 0.0);
  }
  SUBCASE("sum of recalls") {
    CHECK(sum_of_recalls(RecallReport{}) == 0.0);
    const RecallReport r{{0.1, 0.3, 0.5}, {0.2, 0.4, 0.6}};
    CHECK(std::abs(sum_of_recalls(r) - 2.1) < 1e-15);
    CHECK(unflatten(flatten(r)) == r);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(evaluate_recall(RetrievalIndex::one_to_one(2), Matrix(2, 3)), Error);
  }
}

TEST_CASE("recall matches the full-sort oracle") {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> audios(1, 50);
  std::uniform_int_distribution<std::size_t> captions(1, 5);
  std::uniform_int_distribution<int> levels(0, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t na = audios(rng);
    const std::size_t per = trial % 2 == 0 ? 5 : captions(rng);
    const auto idx = grouped(na, per);
    Matrix sims = oracle::random_matrix(na, idx.text_count(), rng);
    // Every third instance uses coarse scores so ties are common.
    if (trial % 3 == 0)
      for (double& v : sims.values()) v = levels(rng) / 10.0;
    const auto report = evaluate_recall(idx, sims);
    for (std::size_t k : {1u, 2u, 5u, 10u, 1000u}) {
      const auto expected = sorted_recall(idx, sims, k);
      const auto got = recall_at_k(idx, sims, k);
      CHECK(got.text_to_audio == expected.text_to_audio);
      CHECK(got.audio_to_text == expected.audio_to_text);
      CHECK(got.text_to_audio >= 0.0);
      CHECK(got.text_to_audio <= 1.0);
    }
    CHECK(report.text_to_audio.r5 == sorted_recall(idx, sims, 5).text_to_audio);
    CHECK(report.audio_to_text.r10 == sorted_recall(idx, sims, 10).audio_to_text);
    // Monotone in k; R@k is 1 once k reaches the pool size.
    CHECK(report.text_to_audio.r1 <= report.text_to_audio.r5);
    CHECK(report.text_to_audio.r5 <= report.text_to_audio.r10);
    CHECK(report.audio_to_text.r1 <= report.audio_to_text.r5);
    CHECK(report.audio_to_text.r5 <= report.audio_to_text.r10);
    CHECK(recall_at_k(idx, sims, na).text_to_audio == 1.0);
    CHECK(recall_at_k(idx, sims, idx.text_count()).audio_to_text == 1.0);
  }
}
