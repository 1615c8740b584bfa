#pragma once

#include <filesystem>
#include <string>

#include "hdys/kinrep/record.hpp"

namespace hdys::data {

inline constexpr const char* kRecordMagic = "HDYSREC1";

/// "HDYSREC1" | id | profile | tree | f64 fps | f64 mass | u32 mask | u32 frames
/// | u32 n_markers + i32 site ids | u8 boundary[frames] | u32 width per present
/// channel | frame-major f64 payload. The oracle trajectory is not stored.
std::string encode_record(const kin::SequenceRecord& r);
/// Validates eagerly; throws FormatError on bad magic, truncation or a
/// mask/payload mismatch.
kin::SequenceRecord decode_record(const std::string& bytes);

void write_record(const std::filesystem::path& path, const kin::SequenceRecord& r);
kin::SequenceRecord read_record(const std::filesystem::path& path);

}  // namespace hdys::data
