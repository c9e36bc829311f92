// SPDX-License-Identifier: Apache-2.0

#include "asem/checkpoint.hpp"

#include <string>

#include "asem/error.hpp"
#include "asem/io.hpp"
#include "json.hpp"

namespace asem {
namespace {

constexpr std::uint64_t kMaxDim = 1ULL << 24;

nlohmann::ordered_json head_json(const MlpParams& p) {
  return {{"d_in", p.d_in()}, {"d_hidden", p.d_hidden()}, {"d_out", p.d_out()}};
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  io::ByteWriter w;
  w.magic("ASEM");
  w.u32(kCheckpointVersion);
  w.u32(2);
  for (const MlpParams* head : {&ckpt.audio, &ckpt.text}) {
    w.u64(head->d_in());
    w.u64(head->d_hidden());
    w.u64(head->d_out());
  }
  for (const MlpParams* head : {&ckpt.audio, &ckpt.text}) {
    for (auto t : head->tensors()) w.f64s(t);
  }
  return w.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  r.expect_magic("ASEM");
  if (const auto version = r.u32(); version != kCheckpointVersion) {
    throw Error(ErrorCode::BadFormat, source + ": unsupported checkpoint version " +
                                          std::to_string(version));
  }
  if (const auto heads = r.u32(); heads != 2) {
    throw Error(ErrorCode::BadFormat, source + ": expected 2 heads, found " +
                                          std::to_string(heads));
  }
  Checkpoint ckpt;
  for (MlpParams* head : {&ckpt.audio, &ckpt.text}) {
    const auto d_in = r.u64();
    const auto d_hidden = r.u64();
    const auto d_out = r.u64();
    if (d_in == 0 || d_hidden == 0 || d_out == 0 || d_in > kMaxDim || d_hidden > kMaxDim ||
        d_out > kMaxDim) {
      throw Error(ErrorCode::BadFormat, source + ": implausible head dimensions");
    }
    *head = MlpParams::zeros(d_in, d_hidden, d_out);
  }
  for (MlpParams* head : {&ckpt.audio, &ckpt.text}) {
    for (auto t : head->tensors()) r.f64s(t);
    if (!head->w1.all_finite() || !head->w2.all_finite()) {
      throw Error(ErrorCode::NonFiniteValue, source + ": non-finite weights");
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::BadFormat, source + ": " + std::to_string(r.remaining()) +
                                          " trailing bytes");
  }
  return ckpt;
}

std::filesystem::path checkpoint_sidecar_path(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar += ".json";
  return sidecar;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file_atomic(path, encode_checkpoint(ckpt));
  nlohmann::ordered_json meta = {{"format", "ASEM"},
                                 {"version", kCheckpointVersion},
                                 {"seed", ckpt.seed},
                                 {"audio", head_json(ckpt.audio)},
                                 {"text", head_json(ckpt.text)}};
  io::write_file_atomic(checkpoint_sidecar_path(path), meta.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ckpt = decode_checkpoint(io::read_bytes(path), path.string());
  const auto sidecar = checkpoint_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    try {
      const auto meta = nlohmann::json::parse(io::read_text(sidecar));
      ckpt.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadFormat, sidecar.string() + ": " + e.what());
    }
  }
  return ckpt;
}

}  // namespace asem
