#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maga/params.hpp"

namespace maga {

/// Checkpoint container, all integers little-endian:
///
///   "MAGA" | u32 version
///   per parameter, sorted by path:
///     u16 path length | path bytes | u8 rank | u32 extent * rank | f64 * count
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ParamStore& params);

/// Overwrites every parameter in `params` from `bytes`. The record set must
/// match the store exactly (same paths and shapes).
void decode_checkpoint(const std::vector<std::uint8_t>& bytes, ParamStore& params);

void save_checkpoint(const ParamStore& params, const std::string& path);
void load_checkpoint(const std::string& path, ParamStore& params);

}  // namespace maga
