// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asem/checkpoint.hpp"
#include "asem/data.hpp"
#include "asem/evaluation.hpp"
#include "asem/objectives.hpp"
#include "asem/optimizer.hpp"

namespace asem {

struct TrainConfig {
  Objective objective = Objective::NtXent;
  ObjectiveConfig objective_params;
  std::size_t batch_size = 32;
  /// total_epochs doubles as the epoch count.
  LrSchedule schedule;
  AdamHyper adam;
  std::size_t embedding_dim = 1024;
  /// 0 means "same as embedding_dim".
  std::size_t hidden_dim = 0;
  std::vector<std::uint64_t> seeds{0, 1, 2};

  std::size_t epochs() const noexcept { return schedule.total_epochs; }
  std::size_t hidden() const noexcept { return hidden_dim == 0 ? embedding_dim : hidden_dim; }
  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  RecallReport val;
  double val_sum = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
  /// Checkpoint with the highest validation sum of recalls (earliest epoch on
  /// ties); the initial parameters when no epoch ran.
  Checkpoint best;
  std::optional<std::size_t> best_epoch;
  std::vector<EpochMetrics> epochs;
};

/// Fresh audio and text heads for the given seed.
Checkpoint init_checkpoint(const TrainConfig& cfg, std::size_t audio_dim, std::size_t text_dim,
                           std::uint64_t seed);

/// Projects features through a head and L2-normalizes the rows.
Matrix embed(const MlpParams& head, const Matrix& features);
/// audios x texts cosine scores for every row of the split.
Matrix score_matrix(const Checkpoint& ckpt, const PairedDataset& split);
RecallReport evaluate_checkpoint(const Checkpoint& ckpt, const PairedDataset& split);

/// Runs the full schedule on data.train, selecting by data.val. Throws
/// NonFiniteLoss naming epoch and batch, or InfeasibleConstraint from
/// batching. Deterministic for a given (cfg, data, seed).
TrainResult train_one(const TrainConfig& cfg, const DatasetSplits& data, std::uint64_t seed);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population (n divisor)
};

MeanStd mean_std(std::span<const double> values);

struct ComparisonConfig {
  TrainConfig base;
  std::vector<Objective> objectives{std::begin(kAllObjectives), std::end(kAllObjectives)};
  /// Empty means {base.batch_size}.
  std::vector<std::size_t> batch_sizes;
  /// Upper bound on concurrently running (objective, batch, seed) runs.
  std::size_t jobs = 1;
};

struct RunOutcome {
  Objective objective = Objective::NtXent;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<std::size_t> best_epoch;
  RecallReport test;
  std::vector<EpochMetrics> curve;
};

struct RecallSpread {
  RecallReport mean;
  RecallReport stddev;
};

struct Aggregate {
  Objective objective = Objective::NtXent;
  std::size_t batch_size = 0;
  std::size_t runs_ok = 0;
  std::size_t runs_total = 0;
  /// Over successful runs only; zero when none succeeded.
  RecallSpread spread;
};

struct ComparisonReport {
  std::vector<RunOutcome> runs;        // batch-major, then objective, then seed
  std::vector<Aggregate> aggregates;   // batch-major, then objective
};

RecallSpread aggregate_recalls(std::span<const RecallReport> reports);

/// Trains every (batch size, objective, seed) combination, evaluates the
/// selected checkpoint on the test split and aggregates per objective.
/// Failed runs are recorded, never retried.
ComparisonReport run_comparison(const ComparisonConfig& cfg, const DatasetSplits& data);

}  // namespace asem
