// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "asem/mlp.hpp"

namespace asem {

/// Both projection heads of a trained model.
///
/// Binary layout (all integers and floats little-endian):
///   "ASEM"  magic, 4 bytes
///   u32     format version (kCheckpointVersion)
///   u32     head count (2: audio, text)
///   per head: u64 d_in, u64 d_hidden, u64 d_out
///   f64[]   audio w1, b1, w2, b2 then text w1, b1, w2, b2, row-major
///
/// A JSON sidecar (`<path>.json`) records the dims and the seed.
struct Checkpoint {
  MlpParams audio;
  MlpParams text;
  std::uint64_t seed = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws BadFormat on bad magic, version, or length.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source);

std::filesystem::path checkpoint_sidecar_path(const std::filesystem::path& path);
/// Writes the binary and its sidecar, each atomically.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Seed comes from the sidecar when present, otherwise 0.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace asem
