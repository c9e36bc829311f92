// SPDX-License-Identifier: Apache-2.0

#include "asem/config.hpp"

#include "asem/error.hpp"
#include "asem/io.hpp"

namespace asem::config {

using nlohmann::json;

json defaults() {
  const TrainConfig train;
  const SyntheticSpec synth;
  json objectives = json::array();
  for (Objective o : kAllObjectives) objectives.push_back(std::string(to_string(o)));
  return {
      {"dataset", ""},
      {"checkpoint", ""},
      {"split", "test"},
      {"objective", std::string(to_string(train.objective))},
      {"objectives", objectives},
      {"margin", train.objective_params.triplet.margin},
      {"temperature", train.objective_params.nt_xent.temperature},
      {"weights", {{"pos", train.objective_params.weights.pos},
                   {"neg", train.objective_params.weights.neg}}},
      {"batch_size", train.batch_size},
      {"batch_sizes", json::array()},
      {"epochs", train.schedule.total_epochs},
      {"lr", {{"base", train.schedule.base_lr},
              {"decay_factor", train.schedule.decay_factor},
              {"decay_every", train.schedule.decay_every}}},
      {"adam", {{"beta1", train.adam.beta1}, {"beta2", train.adam.beta2}, {"eps", train.adam.eps}}},
      {"embedding_dim", train.embedding_dim},
      {"hidden_dim", train.hidden_dim},
      {"seeds", train.seeds},
      {"synthetic", {{"n_concepts", synth.n_concepts},
                     {"captions_per_audio", synth.captions_per_audio},
                     {"d_latent", synth.d_latent},
                     {"d_audio", synth.d_audio},
                     {"d_text", synth.d_text},
                     {"noise_sigma", synth.noise_sigma},
                     {"seed", synth.seed},
                     {"val_fraction", synth.val_fraction},
                     {"test_fraction", synth.test_fraction},
                     {"identity_maps", synth.identity_maps},
                     {"name", synth.name}}},
  };
}

namespace {

void merge(json& target, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) {
    throw Error(ErrorCode::InvalidConfig, (prefix.empty() ? "config" : prefix) +
                                              " must be a JSON object");
  }
  for (const auto& [key, value] : patch.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (!target.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + name + "'");
    if (target[key].is_object()) {
      merge(target[key], value, name);
    } else {
      target[key] = value;
    }
  }
}

template <typename T>
T get(const json& cfg, const std::string& dotted) {
  const json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    node = &node->at(dotted.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "key '" + dotted + "': " + e.what());
  }
}

void resolve_relative(json& cfg, const char* key, const std::filesystem::path& base) {
  const auto value = cfg.at(key).get<std::string>();
  if (value.empty()) return;
  const std::filesystem::path p(value);
  if (p.is_relative()) cfg[key] = (base / p).lexically_normal().string();
}

}  // namespace

void apply_override(json& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::InvalidConfig,
                "override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  if (node->is_object()) {
    merge(*node, value, key);
  } else {
    *node = std::move(value);
  }
}

json load(const std::optional<std::filesystem::path>& file,
          std::span<const std::string> overrides) {
  json cfg = defaults();
  if (file) {
    json patch = json::parse(io::read_text(*file), nullptr, false);
    if (patch.is_discarded()) {
      throw Error(ErrorCode::InvalidConfig, file->string() + ": not valid JSON");
    }
    merge(cfg, patch, "");
    const auto base = file->parent_path();
    resolve_relative(cfg, "dataset", base);
    resolve_relative(cfg, "checkpoint", base);
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

TrainConfig train_config(const json& cfg) {
  TrainConfig tc;
  const auto objective_name = get<std::string>(cfg, "objective");
  const auto objective = parse_objective(objective_name);
  if (!objective) {
    throw Error(ErrorCode::InvalidConfig, "objective '" + objective_name + "' is not one of "
                                          "triplet-sum, triplet-max, triplet-weighted, nt-xent");
  }
  tc.objective = *objective;
  tc.objective_params.triplet.margin = get<double>(cfg, "margin");
  tc.objective_params.nt_xent.temperature = get<double>(cfg, "temperature");
  tc.objective_params.weights.pos = get<std::vector<double>>(cfg, "weights.pos");
  tc.objective_params.weights.neg = get<std::vector<double>>(cfg, "weights.neg");
  tc.batch_size = get<std::size_t>(cfg, "batch_size");
  tc.schedule.total_epochs = get<std::size_t>(cfg, "epochs");
  tc.schedule.base_lr = get<double>(cfg, "lr.base");
  tc.schedule.decay_factor = get<double>(cfg, "lr.decay_factor");
  tc.schedule.decay_every = get<std::size_t>(cfg, "lr.decay_every");
  tc.adam.beta1 = get<double>(cfg, "adam.beta1");
  tc.adam.beta2 = get<double>(cfg, "adam.beta2");
  tc.adam.eps = get<double>(cfg, "adam.eps");
  tc.embedding_dim = get<std::size_t>(cfg, "embedding_dim");
  tc.hidden_dim = get<std::size_t>(cfg, "hidden_dim");
  tc.seeds = get<std::vector<std::uint64_t>>(cfg, "seeds");
  tc.validate();
  return tc;
}

std::vector<Objective> objectives(const json& cfg) {
  std::vector<Objective> out;
  for (const auto& name : get<std::vector<std::string>>(cfg, "objectives")) {
    const auto o = parse_objective(name);
    if (!o) throw Error(ErrorCode::InvalidConfig, "objectives: unknown objective '" + name + "'");
    out.push_back(*o);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "objectives must not be empty");
  return out;
}

std::vector<std::size_t> batch_sizes(const json& cfg) {
  auto sizes = get<std::vector<std::size_t>>(cfg, "batch_sizes");
  if (sizes.empty()) sizes.push_back(get<std::size_t>(cfg, "batch_size"));
  for (std::size_t b : sizes) {
    if (b == 0) throw Error(ErrorCode::InvalidConfig, "batch_sizes entries must be >= 1");
  }
  return sizes;
}

SyntheticSpec synthetic_spec(const json& cfg) {
  SyntheticSpec s;
  s.n_concepts = get<std::size_t>(cfg, "synthetic.n_concepts");
  s.captions_per_audio = get<std::size_t>(cfg, "synthetic.captions_per_audio");
  s.d_latent = get<std::size_t>(cfg, "synthetic.d_latent");
  s.d_audio = get<std::size_t>(cfg, "synthetic.d_audio");
  s.d_text = get<std::size_t>(cfg, "synthetic.d_text");
  s.noise_sigma = get<double>(cfg, "synthetic.noise_sigma");
  s.seed = get<std::uint64_t>(cfg, "synthetic.seed");
  s.val_fraction = get<double>(cfg, "synthetic.val_fraction");
  s.test_fraction = get<double>(cfg, "synthetic.test_fraction");
  s.identity_maps = get<bool>(cfg, "synthetic.identity_maps");
  s.name = get<std::string>(cfg, "synthetic.name");
  return s;
}

Split split(const json& cfg) {
  const auto name = get<std::string>(cfg, "split");
  for (Split s : kAllSplits) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidConfig, "split '" + name + "' is not train, val or test");
}

}  // namespace asem::config
