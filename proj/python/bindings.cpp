// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "asem/checkpoint.hpp"
#include "asem/config.hpp"
#include "asem/data.hpp"
#include "asem/embedding.hpp"
#include "asem/error.hpp"
#include "asem/evaluation.hpp"
#include "asem/objectives.hpp"
#include "asem/report.hpp"
#include "asem/trainer.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace asem;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::ShapeMismatch, "expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

py::dict direction_dict(const DirectionRecall& d) {
  py::dict out;
  out["r1"] = d.r1;
  out["r5"] = d.r5;
  out["r10"] = d.r10;
  return out;
}

py::dict recall_dict(const RecallReport& r) {
  py::dict out;
  out["text_to_audio"] = direction_dict(r.text_to_audio);
  out["audio_to_text"] = direction_dict(r.audio_to_text);
  out["sum"] = sum_of_recalls(r);
  return out;
}

Objective objective_from(const std::string& name) {
  const auto o = parse_objective(name);
  if (!o) throw Error(ErrorCode::InvalidConfig, "unknown objective '" + name + "'");
  return *o;
}

// Config dict (same keys as the JSON config) with optional dataset override.
nlohmann::json config_from(const py::dict& overrides) {
  std::vector<std::string> assignments;
  const auto json_mod = py::module_::import("json");
  for (const auto& [key, value] : overrides) {
    assignments.push_back(py::str(key).cast<std::string>() + "=" +
                          json_mod.attr("dumps")(value).cast<std::string>());
  }
  return config::load(std::nullopt, assignments);
}

py::dict split_dict(const PairedDataset& ds) {
  py::dict out;
  out["audio_ids"] = ds.audio_ids;
  out["text_ids"] = ds.text_ids;
  out["audio"] = to_array(ds.audio_features);
  out["text"] = to_array(ds.text_features);
  std::vector<std::size_t> owner(ds.text_ids.size());
  for (const auto& p : ds.pairs) owner[p.text] = p.audio;
  out["text_to_audio"] = owner;
  return out;
}

py::dict dataset_dict(const DatasetSplits& data) {
  py::dict out;
  out["name"] = data.name;
  out["audio_dim"] = data.audio_dim;
  out["text_dim"] = data.text_dim;
  for (Split s : kAllSplits) out[py::str(std::string(to_string(s)))] = split_dict(data.at(s));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-modal metric learning for audio-text retrieval";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(e.code() == ErrorCode::InvalidConfig ? PyExc_ValueError
                                                           : PyExc_RuntimeError,
                      e.what());
    }
  });

  m.attr("OBJECTIVES") = [] {
    std::vector<std::string> names;
    for (Objective o : kAllObjectives) names.emplace_back(to_string(o));
    return names;
  }();

  m.def("l2_normalize_rows", [](const Array& x) {
    return to_array(l2_normalize_rows(to_matrix(x)).value());
  }, py::arg("x"), "Rows scaled to unit L2 norm; raises on a zero-norm row.");

  m.def("cosine_similarity", [](const Array& audio, const Array& text) {
    return to_array(cosine_similarity_matrix(to_matrix(audio), to_matrix(text)).scores());
  }, py::arg("audio"), py::arg("text"), "Square matrix s[i, j] = cos(audio_i, text_j).");

  m.def(
      "loss",
      [](const std::string& objective, const Array& s, double margin, double temperature,
         std::vector<double> pos, std::vector<double> neg) {
        ObjectiveConfig cfg;
        cfg.triplet.margin = margin;
        cfg.nt_xent.temperature = temperature;
        cfg.weights = {std::move(pos), std::move(neg)};
        const auto r = evaluate_objective(objective_from(objective), SimilarityMatrix(to_matrix(s)),
                                          cfg);
        return py::make_tuple(r.value, to_array(r.grad_s));
      },
      py::arg("objective"), py::arg("s"), py::arg("margin") = 0.2, py::arg("temperature") = 0.07,
      py::arg("pos") = PolynomialWeights{}.pos, py::arg("neg") = PolynomialWeights{}.neg,
      "Objective value and its gradient with respect to the similarity matrix.");

  m.def(
      "recall",
      [](const Array& sims, std::vector<std::size_t> text_to_audio) {
        const Matrix m = to_matrix(sims);
        return recall_dict(evaluate_recall(RetrievalIndex(m.rows(), std::move(text_to_audio)), m));
      },
      py::arg("sims"), py::arg("text_to_audio"),
      "R@1/5/10 in both directions for an audios x texts score matrix.");

  m.def(
      "mean_std",
      [](const std::vector<double>& v) {
        const auto ms = mean_std(v);
        return py::make_tuple(ms.mean, ms.stddev);
      },
      py::arg("values"), "Mean and population standard deviation.");
  m.def("format_mean_std", &format_mean_std, py::arg("mean"), py::arg("std"));

  m.def(
      "generate_synthetic",
      [](const py::dict& spec) {
        py::dict prefixed;
        for (const auto& [k, v] : spec) prefixed[py::str("synthetic." + py::str(k).cast<std::string>())] = v;
        return dataset_dict(generate_synthetic(config::synthetic_spec(config_from(prefixed))).data);
      },
      py::arg("spec") = py::dict(), "Synthetic paired features as numpy arrays per split.");

  m.def(
      "write_synthetic",
      [](const std::filesystem::path& dir, const py::dict& spec) {
        py::dict prefixed;
        for (const auto& [k, v] : spec) prefixed[py::str("synthetic." + py::str(k).cast<std::string>())] = v;
        return save_dataset(dir,
                            generate_synthetic(config::synthetic_spec(config_from(prefixed))).data);
      },
      py::arg("dir"), py::arg("spec") = py::dict(), "Writes a dataset; returns the manifest path.");

  m.def("load_dataset", [](const std::filesystem::path& p) { return dataset_dict(load_dataset(p)); },
        py::arg("manifest"));

  m.def(
      "train",
      [](const std::filesystem::path& manifest, const py::dict& cfg, std::uint64_t seed,
         const std::optional<std::filesystem::path>& checkpoint) {
        const TrainConfig tc = config::train_config(config_from(cfg));
        const DatasetSplits data = load_dataset(manifest);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train_one(tc, data, seed);
        }
        if (checkpoint) save_checkpoint(*checkpoint, r.best);
        py::list epochs;
        for (const auto& e : r.epochs) {
          py::dict row;
          row["epoch"] = e.epoch;
          row["lr"] = e.lr;
          row["train_loss"] = e.train_loss;
          row["val"] = recall_dict(e.val);
          epochs.append(row);
        }
        py::dict out;
        out["best_epoch"] = r.best_epoch;
        out["epochs"] = epochs;
        out["test"] = data.test.empty() ? py::object(py::none())
                                        : py::object(recall_dict(evaluate_checkpoint(r.best, data.test)));
        return out;
      },
      py::arg("manifest"), py::arg("config") = py::dict(), py::arg("seed") = 0,
      py::arg("checkpoint") = py::none(),
      "Trains one objective; config keys follow the JSON config schema.");

  m.def(
      "evaluate",
      [](const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
         const std::string& split) {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        const DatasetSplits data = load_dataset(manifest);
        for (Split s : kAllSplits) {
          if (to_string(s) == split) return recall_dict(evaluate_checkpoint(ckpt, data.at(s)));
        }
        throw Error(ErrorCode::InvalidConfig, "split '" + split + "' is not train, val or test");
      },
      py::arg("checkpoint"), py::arg("manifest"), py::arg("split") = "test");

  m.def(
      "compare",
      [](const std::filesystem::path& manifest, const py::dict& cfg, std::size_t jobs) {
        const auto json_cfg = config_from(cfg);
        ComparisonConfig cc;
        cc.base = config::train_config(json_cfg);
        cc.objectives = config::objectives(json_cfg);
        cc.batch_sizes = config::batch_sizes(json_cfg);
        cc.jobs = jobs;
        const DatasetSplits data = load_dataset(manifest);
        ComparisonReport report;
        {
          py::gil_scoped_release release;
          report = run_comparison(cc, data);
        }
        py::dict out;
        out["markdown"] = comparison_markdown(report);
        out["csv"] = comparison_csv(report);
        out["runs_csv"] = runs_csv(report);
        return out;
      },
      py::arg("manifest"), py::arg("config") = py::dict(), py::arg("jobs") = 1,
      "Trains every objective x batch size x seed and returns the rendered tables.");
}
