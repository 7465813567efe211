#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mappfn/diff/parameter_set.hpp"

namespace mappfn::diff {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointData {
  /// Free-form JSON text stored ahead of the tensors (the model config).
  std::string header_json;
  ParameterSet<float> params;
  std::optional<ParameterSet<float>> ema;
};

/// Layout: magic "MPFNCKPT", u32 version, u32 header length, header bytes,
/// u32 entry count, then per entry u32 name length, name, u32 rows, u32 cols,
/// rows*cols little-endian f32. EMA entries are prefixed "ema/", the others
/// "params/".
void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data);
CheckpointData read_checkpoint(const std::filesystem::path& path);

}  // namespace mappfn::diff
