// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asem/data.hpp"
#include "asem/trainer.hpp"
#include "json.hpp"

namespace asem::config {

/// The full configuration schema with its default values. Every key a config
/// file or override may set appears here.
///
/// {
///   "dataset": "",                 manifest path (train, compare, eval, validate)
///   "checkpoint": "",              checkpoint path (eval)
///   "split": "test",               split to evaluate (eval)
///   "objective": "nt-xent",        train
///   "objectives": [...all four],   compare
///   "margin": 0.2, "temperature": 0.07,
///   "weights": {"pos": [0.5, -0.7, 0.2], "neg": [0.03, -0.4, 0.9]},
///   "batch_size": 32, "batch_sizes": [],   empty sweep means [batch_size]
///   "epochs": 50,
///   "lr": {"base": 1e-4, "decay_factor": 0.1, "decay_every": 20},
///   "adam": {"beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
///   "embedding_dim": 1024, "hidden_dim": 0,   0 means embedding_dim
///   "seeds": [0, 1, 2],
///   "synthetic": {n_concepts, captions_per_audio, d_latent, d_audio, d_text,
///                 noise_sigma, seed, val_fraction, test_fraction,
///                 identity_maps, name}
/// }
nlohmann::json defaults();

/// Sets a dotted key path ("lr.base=5e-5"). The value is parsed as JSON and
/// falls back to a plain string. Throws InvalidConfig for unknown keys.
void apply_override(nlohmann::json& cfg, std::string_view assignment);

/// Defaults, then the file (if given), then overrides in order. Unknown keys
/// are rejected with their dotted name. Relative "dataset"/"checkpoint" paths
/// in the file resolve against the file's directory.
nlohmann::json load(const std::optional<std::filesystem::path>& file,
                    std::span<const std::string> overrides);

TrainConfig train_config(const nlohmann::json& cfg);
std::vector<Objective> objectives(const nlohmann::json& cfg);
std::vector<std::size_t> batch_sizes(const nlohmann::json& cfg);
SyntheticSpec synthetic_spec(const nlohmann::json& cfg);
Split split(const nlohmann::json& cfg);

}  // namespace asem::config
