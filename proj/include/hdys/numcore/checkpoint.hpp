#pragma once

#include <filesystem>
#include <string>

#include "hdys/numcore/adamw.hpp"
#include "hdys/numcore/params.hpp"

namespace hdys::nc {

/// Entries whose name starts with this prefix are data statistics, restored
/// as non-trainable.
inline constexpr std::string_view kStatPrefix = "stat.";

struct Checkpoint {
  ParameterStore params;
  AdamWState optimizer;
};

/// Binary layout (little-endian):
///   "HDYS1" | u32 count | count x { u32 name_len, name, u32 rank, u64 extents[rank], f64 payload }
///   | "ADAMW" | u64 step | f64 lr, weight_decay, beta1, beta2, eps | u32 count
///   | count x { u32 name_len, name, u64 n, f64 m[n], f64 v[n] }
std::string encode_checkpoint(const ParameterStore& params, const AdamWState& optimizer);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params, const AdamWState& optimizer);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hdys::nc
