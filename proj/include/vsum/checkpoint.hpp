#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "vsum/model.hpp"
#include "vsum/optim.hpp"
#include "vsum/rng.hpp"

namespace vsum {

enum class ModelRole : std::uint8_t { kGenerator = 0, kSummarizer = 1 };

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;  // widened; stored at the checkpoint's precision
};

// Everything needed to resume or deploy a model.
//
// File layout (all integers little-endian):
//   "KFCK" | u32 version | u8 role | u8 bytes-per-scalar (4 or 8)
//   | u64 layers, heads, dim, ff, max_len | u64 epoch | f64 best_loss
//   | u64 x4 rng words | u8 has_spare | f64 spare | u64 optimizer step
//   | u32 record count | records | u64 FNV-1a of all preceding bytes
// Each record is: u32 name length, name, u32 rank, u64 dims, then values as
// float32 or float64 per the precision byte. Records hold the model
// parameters, "mask_token", and "adamw.m/<param>" / "adamw.v/<param>".
template <typename T>
struct ModelCheckpoint {
  ModelRole role = ModelRole::kGenerator;
  EncoderConfig config;
  std::vector<NamedTensor> params;
  std::vector<T> mask_token;
  AdamWState<T> optimizer;
  std::uint64_t epoch = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  Rng::State rng;
};

template <typename T>
ModelCheckpoint<T> make_checkpoint(const GeneratorModel<T>& model);
template <typename T>
ModelCheckpoint<T> make_checkpoint(const SummarizerModel<T>& model);

// Rebuild models from a checkpoint. Throws kConfigMismatch on role mismatch
// and kCorruptFile when a parameter is missing or misshapen.
template <typename T>
GeneratorModel<T> generator_from_checkpoint(const ModelCheckpoint<T>& ckpt);
template <typename T>
SummarizerModel<T> summarizer_from_checkpoint(const ModelCheckpoint<T>& ckpt);

template <typename T>
std::string serialize_checkpoint(const ModelCheckpoint<T>& ckpt);
// Throws kCorruptFile (bad magic, truncation, checksum) or kVersionMismatch.
template <typename T>
ModelCheckpoint<T> deserialize_checkpoint(const std::string& bytes);

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint<T>& ckpt);
template <typename T>
ModelCheckpoint<T> load_checkpoint(const std::filesystem::path& path);

// Role recorded in a checkpoint file without decoding the rest.
ModelRole peek_checkpoint_role(const std::filesystem::path& path);

}  // namespace vsum
