// SPDX-License-Identifier: Apache-2.0

#include "asem/report.hpp"

#include <cstdio>
#include <set>

namespace asem {
namespace {

constexpr const char* kDirections[] = {"text-to-audio", "audio-to-text"};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const DirectionRecall& direction(const RecallReport& r, std::size_t d) {
  return d == 0 ? r.text_to_audio : r.audio_to_text;
}

std::string epoch_or_blank(const std::optional<std::size_t>& epoch) {
  return epoch ? std::to_string(*epoch) : std::string();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string format_mean_std(double mean_percent, double std_percent) {
  return fixed(mean_percent, 1) + "±" + fixed(std_percent, 1);
}

std::string comparison_markdown(const ComparisonReport& report) {
  std::set<std::size_t> sizes;
  for (const auto& agg : report.aggregates) sizes.insert(agg.batch_size);
  std::string out;
  for (std::size_t bs : sizes) {
    if (sizes.size() > 1) {
      if (!out.empty()) out += "\n";
      out += "### Batch size " + std::to_string(bs) + "\n\n";
    }
    out += "| Objective | direction | R@1 | R@5 | R@10 |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& agg : report.aggregates) {
      if (agg.batch_size != bs) continue;
      for (std::size_t d = 0; d < 2; ++d) {
        out += "| " + std::string(to_string(agg.objective)) + " | " + kDirections[d] + " |";
        const auto mean = direction(agg.spread.mean, d).values();
        const auto sd = direction(agg.spread.stddev, d).values();
        for (std::size_t k = 0; k < mean.size(); ++k) {
          out += " " + (agg.runs_ok == 0 ? std::string("n/c")
                                         : format_mean_std(100.0 * mean[k], 100.0 * sd[k])) +
                 " |";
        }
        out += "\n";
      }
    }
    std::string failures;
    for (const auto& run : report.runs) {
      if (run.batch_size != bs || run.ok) continue;
      failures += "- " + std::string(to_string(run.objective)) + " seed " +
                  std::to_string(run.seed) + ": n/c\n";
    }
    if (!failures.empty()) out += "\nRuns that did not converge:\n" + failures;
  }
  return out;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::string out =
      "batch_size,objective,direction,r1_mean,r1_std,r5_mean,r5_std,r10_mean,r10_std,runs_ok,"
      "runs_total\n";
  for (const auto& agg : report.aggregates) {
    for (std::size_t d = 0; d < 2; ++d) {
      out += std::to_string(agg.batch_size) + "," + std::string(to_string(agg.objective)) + "," +
             kDirections[d];
      const auto mean = direction(agg.spread.mean, d).values();
      const auto sd = direction(agg.spread.stddev, d).values();
      for (std::size_t k = 0; k < mean.size(); ++k) {
        out += "," + fixed(mean[k], 6) + "," + fixed(sd[k], 6);
      }
      out += "," + std::to_string(agg.runs_ok) + "," + std::to_string(agg.runs_total) + "\n";
    }
  }
  return out;
}

std::string runs_csv(const ComparisonReport& report) {
  std::string out =
      "batch_size,objective,seed,status,best_epoch,t2a_r1,t2a_r5,t2a_r10,a2t_r1,a2t_r5,a2t_r10,"
      "error\n";
  for (const auto& run : report.runs) {
    out += std::to_string(run.batch_size) + "," + std::string(to_string(run.objective)) + "," +
           std::to_string(run.seed) + "," + (run.ok ? "ok" : "n/c") + "," +
           epoch_or_blank(run.best_epoch);
    for (double v : flatten(run.test)) out += "," + fixed(v, 6);
    out += "," + csv_escape(run.error) + "\n";
  }
  return out;
}

std::string epochs_csv(std::span<const EpochMetrics> epochs) {
  std::string out =
      "epoch,lr,train_loss,val_t2a_r1,val_t2a_r5,val_t2a_r10,val_a2t_r1,val_a2t_r5,val_a2t_r10,"
      "val_sum\n";
  char buf[64];
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch);
    std::snprintf(buf, sizeof buf, ",%.6e,%.17g", e.lr, e.train_loss);
    out += buf;
    for (double v : flatten(e.val)) out += "," + fixed(v, 6);
    out += "," + fixed(e.val_sum, 6) + "\n";
  }
  return out;
}

std::string recall_csv(const RecallReport& report) {
  std::string out = "direction,r1,r5,r10\n";
  for (std::size_t d = 0; d < 2; ++d) {
    out += kDirections[d];
    for (double v : direction(report, d).values()) out += "," + fixed(v, 6);
    out += "\n";
  }
  out += "sum_of_recalls," + fixed(sum_of_recalls(report), 6) + ",,\n";
  return out;
}

std::string recall_table(const RecallReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-14s %7s %7s %7s\n", "direction", "R@1", "R@5", "R@10");
  std::string out = buf;
  for (std::size_t d = 0; d < 2; ++d) {
    const auto v = direction(report, d).values();
    std::snprintf(buf, sizeof buf, "%-14s %7.1f %7.1f %7.1f\n", kDirections[d], 100.0 * v[0],
                  100.0 * v[1], 100.0 * v[2]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-14s %7.3f\n", "sum", sum_of_recalls(report));
  return out + buf;
}

}  // namespace asem
