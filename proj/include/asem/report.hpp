// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>

#include "asem/evaluation.hpp"
#include "asem/trainer.hpp"

namespace asem {

/// Percent values rendered as "<mean>±<std>" with one decimal each.
std::string format_mean_std(double mean_percent, double std_percent);

/// Markdown table, columns Objective | direction | R@1 | R@5 | R@10, cells
/// mean±std in percent. Objectives without a successful run show "n/c".
/// A sweep over several batch sizes emits one titled table per size.
std::string comparison_markdown(const ComparisonReport& report);

/// One row per (batch size, objective, direction) with recall fractions:
/// batch_size,objective,direction,r1_mean,r1_std,r5_mean,r5_std,r10_mean,r10_std,runs_ok,runs_total
std::string comparison_csv(const ComparisonReport& report);

/// One row per run: batch_size,objective,seed,status,best_epoch,t2a_r1,...,a2t_r10,error
std::string runs_csv(const ComparisonReport& report);

/// epoch,lr,train_loss,val_t2a_r1,...,val_a2t_r10,val_sum
std::string epochs_csv(std::span<const EpochMetrics> epochs);

/// direction,r1,r5,r10 plus a trailing sum_of_recalls row.
std::string recall_csv(const RecallReport& report);

/// Aligned-column text rendering of a RecallReport in percent.
std::string recall_table(const RecallReport& report);

}  // namespace asem
