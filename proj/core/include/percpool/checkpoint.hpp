#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "percpool/config.hpp"
#include "percpool/model.hpp"

namespace percpool {

inline constexpr std::array<char, 8> kCheckpointMagic = {'P', 'C', 'P', 'O', 'O', 'L', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: magic, u32 version, u64-length config text, u64 entry count, then
/// per entry a u64-length name followed by a serialized f32 tensor. All
/// integers little-endian.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_text;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  TrainConfig config() const { return parse_config(config_text); }
};

template <typename T>
Checkpoint make_checkpoint(const TrainConfig& config, Model<T>& model);

void write_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& file);

/// Rebuilds the model from the echoed config and copies every tensor in by
/// name. Throws DataError on a missing, extra or mis-shaped tensor.
template <typename T>
Model<T> restore_model(const Checkpoint& ckpt);

}  // namespace percpool
