// SPDX-License-Identifier: Apache-2.0

#include "asem/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "asem/error.hpp"
#include "asem/io.hpp"
#include "json.hpp"

namespace asem {

using nlohmann::ordered_json;

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

void PairedDataset::validate() const {
  const std::string where = std::string(to_string(split)) + " split";
  if (audio_ids.size() != audio_features.rows() || text_ids.size() != text_features.rows()) {
    throw Error(ErrorCode::ShapeMismatch, where + ": id lists do not match feature rows");
  }
  std::vector<int> text_seen(text_features.rows(), 0);
  std::vector<int> audio_seen(audio_features.rows(), 0);
  for (const auto& p : pairs) {
    if (p.text >= text_features.rows()) {
      throw Error(ErrorCode::DanglingPairReference,
                  where + ": pair references text row " + std::to_string(p.text));
    }
    if (p.audio >= audio_features.rows()) {
      throw Error(ErrorCode::DanglingPairReference,
                  where + ": pair references audio row " + std::to_string(p.audio));
    }
    if (text_seen[p.text]++ > 0) {
      throw Error(ErrorCode::DuplicateTextPairing,
                  where + ": text '" + text_ids[p.text] + "' paired more than once");
    }
    audio_seen[p.audio]++;
  }
  for (std::size_t t = 0; t < text_seen.size(); ++t) {
    if (text_seen[t] == 0) {
      throw Error(ErrorCode::UnpairedRow, where + ": text '" + text_ids[t] + "' has no pair");
    }
  }
  for (std::size_t a = 0; a < audio_seen.size(); ++a) {
    if (audio_seen[a] == 0) {
      throw Error(ErrorCode::UnpairedRow, where + ": audio '" + audio_ids[a] + "' has no caption");
    }
  }
}

RetrievalIndex PairedDataset::retrieval_index() const {
  std::vector<std::size_t> owner(text_features.rows(), 0);
  for (const auto& p : pairs) owner.at(p.text) = p.audio;
  return RetrievalIndex(audio_features.rows(), std::move(owner));
}

PairedDataset& DatasetSplits::at(Split split) {
  switch (split) {
    case Split::Train: return train;
    case Split::Val: return val;
    case Split::Test: return test;
  }
  return train;
}

const PairedDataset& DatasetSplits::at(Split split) const {
  return const_cast<DatasetSplits&>(*this).at(split);
}

// ---------------------------------------------------------------------------
// Feature files

std::vector<std::uint8_t> encode_asef(const Matrix& features) {
  io::ByteWriter w;
  w.magic("ASEF");
  w.u32(kFeatureFileVersion);
  w.u64(features.rows());
  w.u64(features.cols());
  w.f64s(features.values());
  return w.bytes();
}

Matrix decode_asef(std::span<const std::uint8_t> bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  r.expect_magic("ASEF");
  if (const auto version = r.u32(); version != kFeatureFileVersion) {
    throw Error(ErrorCode::BadFormat, source + ": unsupported feature version " +
                                          std::to_string(version));
  }
  const auto rows = r.u64();
  const auto dim = r.u64();
  if (dim != 0 && rows > r.remaining() / 8 / dim) {
    throw Error(ErrorCode::BadFormat, source + ": header claims " + std::to_string(rows) + "x" +
                                          std::to_string(dim) + " but file is shorter");
  }
  std::vector<double> values(rows * dim);
  r.f64s(values);
  if (r.remaining() != 0) {
    throw Error(ErrorCode::BadFormat, source + ": trailing bytes");
  }
  try {
    return Matrix(rows, dim, std::move(values));
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
}

std::string encode_tsv(const std::vector<std::string>& ids, const Matrix& features) {
  std::string out;
  char buf[40];
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out += ids.at(r);
    for (double v : features.row(r)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out += '\t';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

FeatureTable decode_tsv(std::string_view text, const std::string& source) {
  FeatureTable table;
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(ErrorCode::BadFormat, source + ":" + std::to_string(line_no) +
                                            ": expected id followed by values");
    }
    table.ids.emplace_back(line.substr(0, tab));
    std::string_view rest = line.substr(tab + 1);
    std::size_t count = 0;
    while (true) {
      const auto next = rest.find('\t');
      const std::string_view field = rest.substr(0, next);
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::BadFormat, source + ":" + std::to_string(line_no) +
                                              ": bad value '" + std::string(field) + "'");
      }
      values.push_back(v);
      ++count;
      if (next == std::string_view::npos) break;
      rest = rest.substr(next + 1);
    }
    if (table.ids.size() == 1) {
      dim = count;
    } else if (count != dim) {
      throw Error(ErrorCode::ShapeMismatch, source + ":" + std::to_string(line_no) + ": " +
                                                std::to_string(count) + " values, expected " +
                                                std::to_string(dim));
    }
  }
  table.values = Matrix(table.ids.size(), dim, std::move(values));
  return table;
}

FeatureTable read_feature_file(const std::filesystem::path& path) {
  if (path.extension() == ".tsv") return decode_tsv(io::read_text(path), path.string());
  return FeatureTable{{}, decode_asef(io::read_bytes(path), path.string())};
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

struct ModalityRows {
  std::vector<std::string> ids;
  Matrix features;
};

ModalityRows load_modality(const ordered_json& entry, const std::filesystem::path& base,
                           std::size_t expected_dim, const std::string& where) {
  if (!entry.is_object() || !entry.contains("path")) {
    throw Error(ErrorCode::BadFormat, where + ": missing \"path\"");
  }
  const auto path = base / entry.at("path").get<std::string>();
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingFile, where + ": " + path.string());
  }
  FeatureTable table = read_feature_file(path);
  ModalityRows rows{std::move(table.ids), std::move(table.values)};
  if (entry.contains("ids")) {
    auto ids = entry.at("ids").get<std::vector<std::string>>();
    if (!rows.ids.empty() && ids != rows.ids) {
      throw Error(ErrorCode::BadFormat, where + ": manifest ids disagree with " + path.string());
    }
    rows.ids = std::move(ids);
  }
  if (rows.ids.empty()) {
    for (std::size_t r = 0; r < rows.features.rows(); ++r) rows.ids.push_back(std::to_string(r));
  }
  if (rows.ids.size() != rows.features.rows()) {
    throw Error(ErrorCode::ShapeMismatch, where + ": " + std::to_string(rows.ids.size()) +
                                              " ids for " +
                                              std::to_string(rows.features.rows()) + " rows");
  }
  if (rows.features.rows() > 0 && rows.features.cols() != expected_dim) {
    throw Error(ErrorCode::ShapeMismatch, where + ": dim " +
                                              std::to_string(rows.features.cols()) +
                                              ", manifest declares " +
                                              std::to_string(expected_dim));
  }
  if (rows.features.rows() == 0) rows.features = Matrix(0, expected_dim);
  return rows;
}

std::unordered_map<std::string, std::size_t> id_lookup(const std::vector<std::string>& ids,
                                                       const std::string& where) {
  std::unordered_map<std::string, std::size_t> lookup;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (!lookup.emplace(ids[r], r).second) {
      throw Error(ErrorCode::BadFormat, where + ": duplicate id '" + ids[r] + "'");
    }
  }
  return lookup;
}

PairedDataset load_split(const ordered_json& node, const std::filesystem::path& base,
                         Split split, std::size_t audio_dim, std::size_t text_dim) {
  const std::string where = "split " + std::string(to_string(split));
  auto audio = load_modality(node.at("audio"), base, audio_dim, where + " audio");
  auto text = load_modality(node.at("text"), base, text_dim, where + " text");
  const auto audio_lookup = id_lookup(audio.ids, where + " audio");
  const auto text_lookup = id_lookup(text.ids, where + " text");

  PairedDataset ds;
  ds.split = split;
  for (const auto& rec : node.at("pairs")) {
    const auto text_id = rec.at("text_id").get<std::string>();
    const auto audio_id = rec.at("audio_id").get<std::string>();
    const auto t = text_lookup.find(text_id);
    if (t == text_lookup.end()) {
      throw Error(ErrorCode::DanglingPairReference, where + ": unknown text_id '" + text_id + "'");
    }
    const auto a = audio_lookup.find(audio_id);
    if (a == audio_lookup.end()) {
      throw Error(ErrorCode::DanglingPairReference,
                  where + ": unknown audio_id '" + audio_id + "'");
    }
    ds.pairs.push_back({t->second, a->second});
  }
  ds.audio_ids = std::move(audio.ids);
  ds.text_ids = std::move(text.ids);
  ds.audio_features = std::move(audio.features);
  ds.text_features = std::move(text.features);
  ds.validate();
  return ds;
}

std::string split_file(Split split, const char* modality) {
  return std::string(to_string(split)) + "." + modality + ".asef";
}

}  // namespace

DatasetSplits load_dataset(const std::filesystem::path& manifest_path) {
  if (!std::filesystem::exists(manifest_path)) {
    throw Error(ErrorCode::MissingFile, manifest_path.string());
  }
  const auto base = manifest_path.parent_path();
  try {
    const auto manifest = ordered_json::parse(io::read_text(manifest_path));
    if (manifest.value("format", "") != "asem-manifest") {
      throw Error(ErrorCode::BadFormat, manifest_path.string() + ": not an asem-manifest");
    }
    DatasetSplits out;
    out.name = manifest.value("name", "");
    out.audio_dim = manifest.at("dims").at("audio").get<std::size_t>();
    out.text_dim = manifest.at("dims").at("text").get<std::size_t>();
    const auto& splits = manifest.at("splits");
    for (Split split : kAllSplits) {
      const std::string key(to_string(split));
      if (splits.contains(key)) {
        out.at(split) = load_split(splits.at(key), base, split, out.audio_dim, out.text_dim);
      } else {
        auto& ds = out.at(split);
        ds.split = split;
        ds.audio_features = Matrix(0, out.audio_dim);
        ds.text_features = Matrix(0, out.text_dim);
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, manifest_path.string() + ": " + e.what());
  }
}

std::filesystem::path save_dataset(const std::filesystem::path& dir, const DatasetSplits& data) {
  std::filesystem::create_directories(dir);
  ordered_json manifest;
  manifest["format"] = "asem-manifest";
  manifest["version"] = 1;
  manifest["name"] = data.name;
  manifest["dims"] = {{"audio", data.audio_dim}, {"text", data.text_dim}};
  ordered_json splits = ordered_json::object();
  for (Split split : kAllSplits) {
    const auto& ds = data.at(split);
    const auto audio_file = split_file(split, "audio");
    const auto text_file = split_file(split, "text");
    io::write_file_atomic(dir / audio_file, encode_asef(ds.audio_features));
    io::write_file_atomic(dir / text_file, encode_asef(ds.text_features));
    ordered_json pairs = ordered_json::array();
    for (const auto& p : ds.pairs) {
      pairs.push_back({{"text_id", ds.text_ids[p.text]}, {"audio_id", ds.audio_ids[p.audio]}});
    }
    splits[std::string(to_string(split))] = {
        {"audio", {{"path", audio_file}, {"ids", ds.audio_ids}}},
        {"text", {{"path", text_file}, {"ids", ds.text_ids}}},
        {"pairs", std::move(pairs)}};
  }
  manifest["splits"] = std::move(splits);
  const auto path = dir / "manifest.json";
  io::write_file_atomic(path, manifest.dump(2) + "\n");
  return path;
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace {

std::string audio_id(std::size_t concept_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%05zu", concept_index);
  return buf;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

std::size_t split_count(std::size_t n, double fraction) {
  const auto count = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  return n >= 3 && fraction > 0.0 ? std::max<std::size_t>(count, 1) : count;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_concepts == 0 || spec.captions_per_audio == 0 || spec.d_latent == 0 ||
      spec.d_audio == 0 || spec.d_text == 0) {
    throw Error(ErrorCode::InvalidConfig, "synthetic counts and dims must be >= 1");
  }
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_sigma must be >= 0");
  if (spec.val_fraction < 0.0 || spec.test_fraction < 0.0 ||
      spec.val_fraction + spec.test_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidConfig, "val_fraction + test_fraction must be in [0, 1)");
  }
  if (spec.identity_maps && (spec.d_audio != spec.d_latent || spec.d_text != spec.d_latent)) {
    throw Error(ErrorCode::InvalidConfig, "identity maps need d_audio == d_text == d_latent");
  }

  std::mt19937_64 rng(spec.seed);
  SyntheticDataset out;
  out.latents = gaussian_matrix(spec.n_concepts, spec.d_latent, 1.0, rng);
  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    auto row = out.latents.row(c);
    double norm_sq = 0.0;
    for (double v : row) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    for (double& v : row) v /= norm;
  }
  if (spec.identity_maps) {
    out.audio_map = Matrix::identity(spec.d_latent);
    out.text_map = Matrix::identity(spec.d_latent);
  } else {
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d_latent));
    out.audio_map = gaussian_matrix(spec.d_latent, spec.d_audio, scale, rng);
    out.text_map = gaussian_matrix(spec.d_latent, spec.d_text, scale, rng);
  }
  const Matrix clean_audio = matmul(out.latents, out.audio_map);
  const Matrix clean_text = matmul(out.latents, out.text_map);

  std::vector<std::size_t> order(spec.n_concepts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_test = split_count(spec.n_concepts, spec.test_fraction);
  const std::size_t n_val = split_count(spec.n_concepts, spec.val_fraction);
  std::vector<Split> assignment(spec.n_concepts, Split::Train);
  for (std::size_t k = 0; k < spec.n_concepts; ++k) {
    if (k < n_test) {
      assignment[order[k]] = Split::Test;
    } else if (k < n_test + n_val) {
      assignment[order[k]] = Split::Val;
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  auto noisy_row = [&](std::span<const double> clean) {
    std::vector<double> row(clean.begin(), clean.end());
    if (spec.noise_sigma > 0.0) {
      for (double& v : row) v += spec.noise_sigma * noise(rng);
    }
    return row;
  };

  DatasetSplits& data = out.data;
  data.name = spec.name;
  data.audio_dim = spec.d_audio;
  data.text_dim = spec.d_text;
  std::map<Split, std::pair<std::vector<double>, std::vector<double>>> values;
  for (Split split : kAllSplits) data.at(split).split = split;
  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    PairedDataset& ds = data.at(assignment[c]);
    auto& [audio_values, text_values] = values[assignment[c]];
    const std::size_t audio_row = ds.audio_ids.size();
    ds.audio_ids.push_back(audio_id(c));
    const auto a = noisy_row(clean_audio.row(c));
    audio_values.insert(audio_values.end(), a.begin(), a.end());
    for (std::size_t k = 0; k < spec.captions_per_audio; ++k) {
      ds.pairs.push_back({ds.text_ids.size(), audio_row});
      ds.text_ids.push_back(audio_id(c) + "_c" + std::to_string(k));
      const auto t = noisy_row(clean_text.row(c));
      text_values.insert(text_values.end(), t.begin(), t.end());
    }
  }
  for (Split split : kAllSplits) {
    PairedDataset& ds = data.at(split);
    auto& [audio_values, text_values] = values[split];
    ds.audio_features = Matrix(ds.audio_ids.size(), spec.d_audio, std::move(audio_values));
    ds.text_features = Matrix(ds.text_ids.size(), spec.d_text, std::move(text_values));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batching

BatchPlan plan_batches(const PairedDataset& dataset, std::size_t batch_size, std::uint64_t seed,
                       std::uint64_t epoch) {
  const std::size_t n = dataset.size();
  if (batch_size == 0 || batch_size > n) {
    throw Error(ErrorCode::InfeasibleConstraint, "batch size " + std::to_string(batch_size) +
                                                     " with " + std::to_string(n) + " pairs");
  }
  const std::size_t n_batches = n / batch_size;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  // Group the shuffled pairs by audio, groups in order of first appearance.
  std::unordered_map<std::size_t, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t idx : perm) {
    const std::size_t audio = dataset.pairs[idx].audio;
    auto [it, inserted] = group_of.emplace(audio, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(idx);
  }
  for (const auto& g : groups) {
    if (g.size() > n_batches) {
      throw Error(ErrorCode::InfeasibleConstraint,
                  "audio '" + dataset.audio_ids.at(dataset.pairs[g.front()].audio) + "' owns " +
                      std::to_string(g.size()) + " captions but the epoch has only " +
                      std::to_string(n_batches) + " batches");
    }
  }

  // Deal the grouped sequence round-robin: a group of c <= n_batches
  // consecutive entries lands in c distinct batches.
  BatchPlan plan;
  plan.batch_size = batch_size;
  plan.batches.assign(n_batches, {});
  for (auto& b : plan.batches) b.reserve(batch_size);
  std::size_t position = 0;
  const std::size_t used = n_batches * batch_size;
  for (const auto& g : groups) {
    for (std::size_t idx : g) {
      if (position == used) break;
      plan.batches[position % n_batches].push_back(idx);
      ++position;
    }
  }
  plan.dropped = n - used;
  return plan;
}

}  // namespace asem
