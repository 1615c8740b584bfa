#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace hdys {

/// 64-bit FNV-1a. Used for config and dataset fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Writes `bytes` to `path` through a sibling temp file and a rename, so
/// readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Derives an independent stream seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace hdys
