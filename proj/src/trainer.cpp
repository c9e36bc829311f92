// SPDX-License-Identifier: Apache-2.0

#include "asem/trainer.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "asem/embedding.hpp"
#include "asem/error.hpp"
#include "asem/mlp.hpp"

namespace asem {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  std::uint32_t out[2];
  seq.generate(std::begin(out), std::end(out));
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<std::size_t> tensor_sizes(const Checkpoint& ckpt) {
  std::vector<std::size_t> sizes;
  for (const MlpParams* head : {&ckpt.audio, &ckpt.text}) {
    for (auto t : head->tensors()) sizes.push_back(t.size());
  }
  return sizes;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size >= 1, "batch_size must be >= 1");
  require(objective != Objective::TripletWeighted || batch_size >= 2,
          "triplet-weighted needs batch_size >= 2");
  require(objective_params.triplet.margin >= 0.0, "margin must be >= 0");
  require(objective_params.nt_xent.temperature > 0.0, "temperature must be > 0");
  require(!objective_params.weights.pos.empty() && !objective_params.weights.neg.empty(),
          "weights.pos and weights.neg need at least one coefficient");
  require(schedule.base_lr > 0.0, "lr.base must be > 0");
  require(schedule.decay_factor > 0.0, "lr.decay_factor must be > 0");
  require(schedule.decay_every >= 1, "lr.decay_every must be >= 1");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "adam.beta1 must be in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "adam.beta2 must be in [0, 1)");
  require(adam.eps > 0.0, "adam.eps must be > 0");
  require(embedding_dim >= 1, "embedding_dim must be >= 1");
  require(!seeds.empty(), "seeds must not be empty");
}

Checkpoint init_checkpoint(const TrainConfig& cfg, std::size_t audio_dim, std::size_t text_dim,
                           std::uint64_t seed) {
  return {mlp_init(audio_dim, cfg.hidden(), cfg.embedding_dim, derive_seed(seed, 1)),
          mlp_init(text_dim, cfg.hidden(), cfg.embedding_dim, derive_seed(seed, 2)), seed};
}

Matrix embed(const MlpParams& head, const Matrix& features) {
  return l2_normalize_rows(mlp_forward(head, features).first).value();
}

Matrix score_matrix(const Checkpoint& ckpt, const PairedDataset& split) {
  return matmul_a_bt(embed(ckpt.audio, split.audio_features),
                     embed(ckpt.text, split.text_features));
}

RecallReport evaluate_checkpoint(const Checkpoint& ckpt, const PairedDataset& split) {
  return evaluate_recall(split.retrieval_index(), score_matrix(ckpt, split));
}

TrainResult train_one(const TrainConfig& cfg, const DatasetSplits& data, std::uint64_t seed) {
  cfg.validate();
  TrainResult result;
  Checkpoint current = init_checkpoint(cfg, data.audio_dim, data.text_dim, seed);
  result.best = current;
  if (cfg.epochs() == 0) return result;
  if (data.val.empty()) {
    throw Error(ErrorCode::InvalidConfig, "validation split is empty; cannot select a model");
  }

  AdamState adam(tensor_sizes(current), cfg.adam);
  const std::uint64_t batch_seed = derive_seed(seed, 3);
  double best_val = -1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs(); ++epoch) {
    const double lr = lr_at_epoch(cfg.schedule, epoch);
    const BatchPlan plan = plan_batches(data.train, cfg.batch_size, batch_seed, epoch);
    double loss_total = 0.0;
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      const auto& batch = plan.batches[b];
      std::vector<std::size_t> audio_rows(batch.size());
      std::vector<std::size_t> text_rows(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) {
        audio_rows[k] = data.train.pairs[batch[k]].audio;
        text_rows[k] = data.train.pairs[batch[k]].text;
      }
      auto [audio_out, audio_cache] =
          mlp_forward(current.audio, data.train.audio_features.gather_rows(audio_rows));
      auto [text_out, text_cache] =
          mlp_forward(current.text, data.train.text_features.gather_rows(text_rows));

      const auto where = " at epoch " + std::to_string(epoch) + " batch " + std::to_string(b);
      if (!audio_out.all_finite() || !text_out.all_finite()) {
        throw Error(ErrorCode::NonFiniteLoss, "non-finite embeddings" + where);
      }
      const NormalizedRows audio_norm = l2_normalize_rows(audio_out);
      const NormalizedRows text_norm = l2_normalize_rows(text_out);
      if (!audio_norm.ok() || !text_norm.ok()) {
        throw Error(ErrorCode::NonFiniteLoss, "zero-norm embedding" + where);
      }
      const SimilarityMatrix s = cosine_similarity_matrix(audio_out, text_out);
      const LossResult loss = evaluate_objective(cfg.objective, s, cfg.objective_params);
      if (!std::isfinite(loss.value) || !loss.grad_s.all_finite()) {
        throw Error(ErrorCode::NonFiniteLoss, "loss " + std::to_string(loss.value) + where);
      }
      loss_total += loss.value;

      const auto [grad_audio, grad_text] = backprop_to_embeddings(
          loss.grad_s, audio_norm.rows, text_norm.rows, audio_out, text_out);
      const auto audio_grads = mlp_backward(current.audio, audio_cache, grad_audio).first;
      const auto text_grads = mlp_backward(current.text, text_cache, grad_text).first;

      std::vector<std::span<double>> params = current.audio.tensors();
      for (auto t : current.text.tensors()) params.push_back(t);
      std::vector<std::span<const double>> grads = audio_grads.tensors();
      for (auto t : text_grads.tensors()) grads.push_back(t);
      adam.apply(params, grads, lr);
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.lr = lr;
    metrics.train_loss = loss_total / static_cast<double>(plan.batches.size());
    metrics.val = evaluate_checkpoint(current, data.val);
    metrics.val_sum = sum_of_recalls(metrics.val);
    if (metrics.val_sum > best_val) {
      best_val = metrics.val_sum;
      result.best = current;
      result.best_epoch = epoch;
    }
    result.epochs.push_back(metrics);
  }
  return result;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

RecallSpread aggregate_recalls(std::span<const RecallReport> reports) {
  std::array<double, 6> means{};
  std::array<double, 6> stds{};
  std::vector<double> column(reports.size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    for (std::size_t r = 0; r < reports.size(); ++r) column[r] = flatten(reports[r])[k];
    const MeanStd ms = mean_std(column);
    means[k] = ms.mean;
    stds[k] = ms.stddev;
  }
  return {unflatten(means), unflatten(stds)};
}

ComparisonReport run_comparison(const ComparisonConfig& cfg, const DatasetSplits& data) {
  if (cfg.objectives.empty()) throw Error(ErrorCode::InvalidConfig, "no objectives to compare");
  cfg.base.validate();
  const std::vector<std::size_t> batch_sizes =
      cfg.batch_sizes.empty() ? std::vector<std::size_t>{cfg.base.batch_size} : cfg.batch_sizes;

  ComparisonReport report;
  for (std::size_t bs : batch_sizes) {
    for (Objective obj : cfg.objectives) {
      for (std::uint64_t seed : cfg.base.seeds) {
        RunOutcome run;
        run.objective = obj;
        run.batch_size = bs;
        run.seed = seed;
        report.runs.push_back(std::move(run));
      }
    }
  }

  auto execute = [&](RunOutcome& run) {
    TrainConfig tc = cfg.base;
    tc.objective = run.objective;
    tc.batch_size = run.batch_size;
    try {
      TrainResult tr = train_one(tc, data, run.seed);
      run.test = evaluate_checkpoint(tr.best, data.test);
      run.best_epoch = tr.best_epoch;
      run.curve = std::move(tr.epochs);
      run.ok = true;
    } catch (const Error& e) {
      run.ok = false;
      run.error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.jobs, report.runs.size()));
  if (workers == 1) {
    for (auto& run : report.runs) execute(run);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < report.runs.size(); i = next++) execute(report.runs[i]);
      });
    }
  }

  for (std::size_t bs : batch_sizes) {
    for (Objective obj : cfg.objectives) {
      Aggregate agg;
      agg.objective = obj;
      agg.batch_size = bs;
      std::vector<RecallReport> ok_reports;
      for (const auto& run : report.runs) {
        if (run.objective != obj || run.batch_size != bs) continue;
        ++agg.runs_total;
        if (run.ok) ok_reports.push_back(run.test);
      }
      agg.runs_ok = ok_reports.size();
      if (!ok_reports.empty()) agg.spread = aggregate_recalls(ok_reports);
      report.aggregates.push_back(agg);
    }
  }
  return report;
}

}  // namespace asem
