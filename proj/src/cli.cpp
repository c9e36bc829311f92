// SPDX-License-Identifier: Apache-2.0

#include "asem/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "asem/checkpoint.hpp"
#include "asem/config.hpp"
#include "asem/data.hpp"
#include "asem/io.hpp"
#include "asem/report.hpp"
#include "asem/trainer.hpp"
#include "json.hpp"

namespace asem::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ExitCode exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::DimMismatch:
      return kConfigError;
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::ZeroNormRow:
      return kNumericError;
    default:
      return kDataError;
  }
}

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string checkpoint;
  std::string split;
  bool verbose = false;
  bool quiet = false;
};

class Session {
 public:
  Session(const Options& opts, const std::string& default_out, std::ostream& err)
      : opts_(opts), out_dir_(opts.out.empty() ? default_out : opts.out) {
    std::optional<fs::path> file;
    if (!opts.config.empty()) file = opts.config;
    cfg_ = config::load(file, opts.overrides);
    // Dedicated flags win over the config file and --set.
    if (!opts.dataset.empty()) cfg_["dataset"] = opts.dataset;
    if (!opts.checkpoint.empty()) cfg_["checkpoint"] = opts.checkpoint;
    if (!opts.split.empty()) cfg_["split"] = opts.split;

    auto console = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    console->set_pattern("%v");
    console->set_level(opts.quiet     ? spdlog::level::warn
                       : opts.verbose ? spdlog::level::debug
                                      : spdlog::level::info);
    std::vector<spdlog::sink_ptr> sinks{console};
    // Commands without a default output directory only log to a file on request.
    if (!out_dir_.empty()) {
      fs::create_directories(out_dir_);
      sinks.push_back(
          std::make_shared<spdlog::sinks::basic_file_sink_mt>((out_dir_ / "asem.log").string()));
    }
    log_ = std::make_shared<spdlog::logger>("asem", sinks.begin(), sinks.end());
    log_->set_level(spdlog::level::debug);
    log_->flush_on(spdlog::level::info);
  }

  const nlohmann::json& cfg() const noexcept { return cfg_; }
  const fs::path& out_dir() const noexcept { return out_dir_; }
  spdlog::logger& log() noexcept { return *log_; }

  fs::path dataset_path() const {
    const auto p = cfg_.at("dataset").get<std::string>();
    if (p.empty()) throw Error(ErrorCode::InvalidConfig, "no dataset given (--dataset or dataset=)");
    return p;
  }

  TrainConfig train_config() const {
    TrainConfig tc = config::train_config(cfg_);
    if (opts_.seed) tc.seeds = {*opts_.seed};
    return tc;
  }

 private:
  const Options& opts_;
  fs::path out_dir_;
  nlohmann::json cfg_;
  std::shared_ptr<spdlog::logger> log_;
};

void describe(spdlog::logger& log, const DatasetSplits& data) {
  log.info("dataset '{}': audio dim {}, text dim {}", data.name, data.audio_dim, data.text_dim);
  for (Split s : kAllSplits) {
    const auto& ds = data.at(s);
    log.info("  {:<5} {} audios, {} captions", to_string(s), ds.audio_features.rows(),
             ds.text_features.rows());
  }
}

int cmd_generate(const Options& opts, std::ostream& out, std::ostream& err) {
  Session session(opts, "data", err);
  SyntheticSpec spec = config::synthetic_spec(session.cfg());
  if (opts.seed) spec.seed = *opts.seed;
  const SyntheticDataset synth = generate_synthetic(spec);
  const fs::path manifest = save_dataset(session.out_dir(), synth.data);
  describe(session.log(), synth.data);
  out << manifest.string() << "\n";
  return kOk;
}

int cmd_validate(const Options& opts, std::ostream& out, std::ostream& err) {
  Session session(opts, "", err);
  const DatasetSplits data = load_dataset(session.dataset_path());
  describe(session.log(), data);
  out << "ok " << session.dataset_path().string() << "\n";
  return kOk;
}

int cmd_train(const Options& opts, std::ostream& out, std::ostream& err) {
  Session session(opts, "run", err);
  const TrainConfig tc = session.train_config();
  const DatasetSplits data = load_dataset(session.dataset_path());
  const std::uint64_t seed = tc.seeds.front();
  auto& log = session.log();
  log.info("training {} for {} epochs, batch {}, seed {}", to_string(tc.objective), tc.epochs(),
           tc.batch_size, seed);
  const TrainResult result = train_one(tc, data, seed);
  for (const auto& e : result.epochs) {
    log.debug("epoch {:>3} lr {:.1e} loss {:.6f} val sum {:.4f}", e.epoch, e.lr, e.train_loss,
              e.val_sum);
  }
  const fs::path& dir = session.out_dir();
  save_checkpoint(dir / "checkpoint.asem", result.best);
  if (tc.epochs() == 0) {
    log.info("0 epochs: wrote initialized checkpoint only");
    out << (dir / "checkpoint.asem").string() << "\n";
    return kOk;
  }
  io::write_file_atomic(dir / "epochs.csv", epochs_csv(result.epochs));
  const RecallReport test = data.test.empty() ? RecallReport{}
                                              : evaluate_checkpoint(result.best, data.test);
  io::write_file_atomic(dir / "report.csv", recall_csv(test));
  io::write_file_atomic(dir / "report.txt", recall_table(test));
  ordered_json summary = {{"objective", std::string(to_string(tc.objective))},
                          {"seed", seed},
                          {"epochs", tc.epochs()},
                          {"batch_size", tc.batch_size},
                          {"best_epoch", *result.best_epoch},
                          {"test", flatten(test)},
                          {"test_sum_of_recalls", sum_of_recalls(test)}};
  io::write_file_atomic(dir / "report.json", summary.dump(2) + "\n");
  log.info("best epoch {}", *result.best_epoch);
  out << recall_table(test);
  return kOk;
}

int cmd_eval(const Options& opts, std::ostream& out, std::ostream& err) {
  Session session(opts, "eval", err);
  const auto ckpt_path = session.cfg().at("checkpoint").get<std::string>();
  if (ckpt_path.empty()) {
    throw Error(ErrorCode::InvalidConfig, "no checkpoint given (--checkpoint or checkpoint=)");
  }
  const Split split = config::split(session.cfg());
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const DatasetSplits data = load_dataset(session.dataset_path());
  if (ckpt.audio.d_in() != data.audio_dim || ckpt.text.d_in() != data.text_dim ||
      ckpt.audio.d_out() != ckpt.text.d_out()) {
    throw Error(ErrorCode::DimMismatch,
                "checkpoint expects audio " + std::to_string(ckpt.audio.d_in()) + " / text " +
                    std::to_string(ckpt.text.d_in()) + " inputs, dataset has " +
                    std::to_string(data.audio_dim) + " / " + std::to_string(data.text_dim));
  }
  const auto& ds = data.at(split);
  if (ds.empty()) throw Error(ErrorCode::InvalidConfig, "split is empty");
  const RecallReport report = evaluate_checkpoint(ckpt, ds);
  io::write_file_atomic(session.out_dir() / "eval.csv", recall_csv(report));
  io::write_file_atomic(session.out_dir() / "eval.txt", recall_table(report));
  out << recall_table(report);
  return kOk;
}

int cmd_compare(const Options& opts, std::ostream& out, std::ostream& err) {
  Session session(opts, "compare", err);
  ComparisonConfig cc;
  cc.base = session.train_config();
  cc.objectives = config::objectives(session.cfg());
  cc.batch_sizes = config::batch_sizes(session.cfg());
  cc.jobs = std::max<std::size_t>(1, opts.jobs);
  const DatasetSplits data = load_dataset(session.dataset_path());
  auto& log = session.log();
  log.info("comparing {} objectives x {} batch sizes x {} seeds, {} epochs", cc.objectives.size(),
           cc.batch_sizes.size(), cc.base.seeds.size(), cc.base.epochs());
  const ComparisonReport report = run_comparison(cc, data);
  std::size_t ok = 0;
  for (const auto& run : report.runs) {
    if (run.ok) {
      ++ok;
    } else {
      log.warn("{} batch {} seed {} did not converge: {}", to_string(run.objective),
               run.batch_size, run.seed, run.error);
    }
  }
  const fs::path& dir = session.out_dir();
  const std::string markdown = comparison_markdown(report);
  io::write_file_atomic(dir / "results.csv", comparison_csv(report));
  io::write_file_atomic(dir / "runs.csv", runs_csv(report));
  io::write_file_atomic(dir / "results.md", markdown);
  out << markdown;
  return ok > 0 ? kOk : kNumericError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-modal metric learning: train and compare retrieval objectives", "asem"};
  app.require_subcommand(1);
  Options opts;

  auto common = [&opts](CLI::App* sub) {
    sub->add_option("--config,-c", opts.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set,-s,--override", opts.overrides, "Override a config key: key.path=value");
    sub->add_option("--out,-o", opts.out, "Output directory");
    sub->add_option("--seed", opts.seed, "Seed override");
    sub->add_flag("--verbose,-v", opts.verbose, "Per-epoch progress");
    sub->add_flag("--quiet,-q", opts.quiet, "Warnings only");
  };

  auto* generate = app.add_subcommand("generate", "Write a synthetic paired-feature dataset");
  common(generate);
  auto* train = app.add_subcommand("train", "Train one objective and keep the best checkpoint");
  common(train);
  train->add_option("--dataset,-d", opts.dataset, "Dataset manifest");
  auto* eval = app.add_subcommand("eval", "Recall@k of a checkpoint on a dataset split");
  common(eval);
  eval->add_option("--dataset,-d", opts.dataset, "Dataset manifest");
  eval->add_option("--checkpoint", opts.checkpoint, "Checkpoint file (.asem)");
  eval->add_option("--split", opts.split, "train, val or test");
  auto* compare = app.add_subcommand("compare", "Train every objective x seed and tabulate");
  common(compare);
  compare->add_option("--dataset,-d", opts.dataset, "Dataset manifest");
  compare->add_option("--jobs,-j", opts.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "Check a dataset manifest and its files");
  common(validate);
  validate->add_option("dataset,--dataset,-d", opts.dataset, "Dataset manifest");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (generate->parsed()) return cmd_generate(opts, out, err);
    if (train->parsed()) return cmd_train(opts, out, err);
    if (eval->parsed()) return cmd_eval(opts, out, err);
    if (compare->parsed()) return cmd_compare(opts, out, err);
    if (validate->parsed()) return cmd_validate(opts, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace asem::cli
