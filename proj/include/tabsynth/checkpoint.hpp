#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tabsynth/model.hpp"

namespace tabsynth {

// File layout:
//   "FNDF" | u32 LE version | u64 LE header length | UTF-8 JSON header | payload
// The header carries the schema and its hash, scaler state, hyperparameters,
// schedule, provenance and an array directory (name, shape, byte offset into
// the payload). The payload is little-endian float32, each array column-major.
inline constexpr char kCheckpointMagic[4] = {'F', 'N', 'D', 'F'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// FNV-1a over the canonical schema JSON.
std::uint64_t schema_hash(const TableSchema& schema);

std::string serialize_checkpoint(const TabularModel& model);
// Throws CorruptCheckpoint on any structural or consistency failure.
TabularModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const TabularModel& model, const std::filesystem::path& path);
TabularModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tabsynth
