// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "asem/evaluation.hpp"
#include "asem/matrix.hpp"

namespace asem {

enum class Split { Train, Val, Test };

inline constexpr Split kAllSplits[] = {Split::Train, Split::Val, Split::Test};

std::string_view to_string(Split split) noexcept;

struct PairRecord {
  std::size_t text = 0;   // row in text_features
  std::size_t audio = 0;  // row in audio_features

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

/// Aligned audio-side and text-side features. One audio may own several
/// captions; every caption belongs to exactly one pair.
struct PairedDataset {
  Split split = Split::Train;
  std::vector<std::string> audio_ids;
  std::vector<std::string> text_ids;
  Matrix audio_features;
  Matrix text_features;
  std::vector<PairRecord> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  /// Throws ShapeMismatch, DanglingPairReference, DuplicateTextPairing or
  /// UnpairedRow naming the offending entry.
  void validate() const;
  /// Caption ownership for evaluation over all rows of this split.
  RetrievalIndex retrieval_index() const;

  friend bool operator==(const PairedDataset&, const PairedDataset&) = default;
};

struct DatasetSplits {
  std::string name;
  std::size_t audio_dim = 0;
  std::size_t text_dim = 0;
  PairedDataset train;
  PairedDataset val;
  PairedDataset test;

  PairedDataset& at(Split split);
  const PairedDataset& at(Split split) const;

  friend bool operator==(const DatasetSplits&, const DatasetSplits&) = default;
};

// ---------------------------------------------------------------------------
// Feature files
//
// ASEF binary (little-endian): "ASEF", u32 version, u64 rows, u64 dim, then
// rows*dim f64 row-major. Row ids live in the manifest.
//
// TSV: one row per line, `id<TAB>v1<TAB>...<TAB>vdim`.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kFeatureFileVersion = 1;

struct FeatureTable {
  std::vector<std::string> ids;  // empty for ASEF files
  Matrix values;
};

std::vector<std::uint8_t> encode_asef(const Matrix& features);
Matrix decode_asef(std::span<const std::uint8_t> bytes, const std::string& source);
std::string encode_tsv(const std::vector<std::string>& ids, const Matrix& features);
FeatureTable decode_tsv(std::string_view text, const std::string& source);
/// Dispatches on extension: ".tsv" is tabular, anything else ASEF.
FeatureTable read_feature_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Manifest
//
// {
//   "format": "asem-manifest", "version": 1, "name": "...",
//   "dims": {"audio": d_a, "text": d_t},
//   "splits": {
//     "train": {
//       "audio": {"path": "train.audio.asef", "ids": ["a0", ...]},
//       "text":  {"path": "train.text.asef",  "ids": ["a0_c0", ...]},
//       "pairs": [{"text_id": "a0_c0", "audio_id": "a0"}, ...]
//     },
//     "val": {...}, "test": {...}
//   }
// }
//
// Paths are relative to the manifest. For ASEF files "ids" is optional and
// defaults to the decimal row index; TSV files carry their own ids. Absent
// splits load as empty.
// ---------------------------------------------------------------------------

DatasetSplits load_dataset(const std::filesystem::path& manifest_path);
/// Writes manifest.json and one ASEF file per modality per split into `dir`.
/// Returns the manifest path.
std::filesystem::path save_dataset(const std::filesystem::path& dir, const DatasetSplits& data);

// ---------------------------------------------------------------------------
// Synthetic paired features
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  std::size_t n_concepts = 256;
  std::size_t captions_per_audio = 5;
  std::size_t d_latent = 16;
  std::size_t d_audio = 64;
  std::size_t d_text = 64;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  /// Use identity mixing maps (requires d_audio == d_text == d_latent).
  bool identity_maps = false;
  std::string name = "synthetic";
};

struct SyntheticDataset {
  DatasetSplits data;
  Matrix latents;    // n_concepts x d_latent, unit rows
  Matrix audio_map;  // d_latent x d_audio
  Matrix text_map;   // d_latent x d_text
};

/// Each concept draws a unit latent; its audio feature is latent * audio_map
/// plus Gaussian noise, each caption is latent * text_map plus independent
/// noise. Concepts are split disjointly into train/val/test.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Batching
// ---------------------------------------------------------------------------

struct BatchPlan {
  /// Pair indices per batch; every batch has exactly batch_size entries.
  std::vector<std::vector<std::size_t>> batches;
  std::size_t batch_size = 0;
  std::size_t dropped = 0;
};

/// Seed-and-epoch determined shuffle into floor(N / B) full batches with no
/// two captions of the same audio in one batch. Throws InfeasibleConstraint
/// when B exceeds N or an audio owns more captions than there are batches.
BatchPlan plan_batches(const PairedDataset& dataset, std::size_t batch_size, std::uint64_t seed,
                       std::uint64_t epoch);

}  // namespace asem
