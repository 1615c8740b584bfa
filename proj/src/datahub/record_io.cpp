#include "hdys/datahub/record_io.hpp"

#include <cstring>

#include "hdys/common/binary.hpp"
#include "hdys/common/util.hpp"

namespace hdys::data {

std::string encode_record(const kin::SequenceRecord& r) {
  kin::validate(r);
  ByteWriter w;
  w.raw(kRecordMagic);
  w.str(r.id);
  w.str(r.profile);
  w.str(r.tree);
  w.put<double>(r.fps);
  w.put<double>(r.mass);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(r.mask.to_ulong()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(r.frames()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(r.marker_subset.size()));
  for (int m : r.marker_subset) w.put<std::int32_t>(m);
  w.raw(std::string_view(reinterpret_cast<const char*>(r.boundary.data()), r.boundary.size()));
  for (int c = 0; c < kin::kChannelCount; ++c)
    if (r.mask.test(c)) w.put<std::uint32_t>(static_cast<std::uint32_t>(r.channels[c].cols()));
  for (int t = 0; t < r.frames(); ++t)
    for (int c = 0; c < kin::kChannelCount; ++c)
      if (r.mask.test(c))
        for (Eigen::Index k = 0; k < r.channels[c].cols(); ++k) w.put<double>(r.channels[c](t, k));
  return w.take();
}

kin::SequenceRecord decode_record(const std::string& bytes) {
  ByteReader rd(bytes);
  const std::size_t magic_len = std::strlen(kRecordMagic);
  if (bytes.size() < magic_len || rd.raw(magic_len) != kRecordMagic)
    throw FormatError("record: version mismatch (expected " + std::string(kRecordMagic) + ")");
  kin::SequenceRecord r;
  r.id = rd.str();
  r.profile = rd.str();
  r.tree = rd.str();
  r.fps = rd.get<double>();
  r.mass = rd.get<double>();
  const auto mask = rd.get<std::uint32_t>();
  if (mask >> kin::kChannelCount) throw FormatError("record '" + r.id + "': unknown channel bits");
  r.mask = kin::ChannelMask(mask);
  const auto frames = rd.get<std::uint32_t>();
  const auto n_markers = rd.get<std::uint32_t>();
  if (n_markers > rd.remaining() / 4) throw FormatError("truncated data");
  for (std::uint32_t i = 0; i < n_markers; ++i) r.marker_subset.push_back(rd.get<std::int32_t>());
  const auto boundary = rd.raw(frames);
  r.boundary.assign(boundary.begin(), boundary.end());
  std::array<std::uint32_t, kin::kChannelCount> width{};
  std::size_t row = 0;
  for (int c = 0; c < kin::kChannelCount; ++c)
    if (r.mask.test(c)) {
      width[c] = rd.get<std::uint32_t>();
      row += width[c];
    }
  if (rd.remaining() != static_cast<std::size_t>(frames) * row * sizeof(double))
    throw FormatError("record '" + r.id + "': payload size does not match mask and widths");
  for (int c = 0; c < kin::kChannelCount; ++c)
    if (r.mask.test(c)) r.channels[c].resize(frames, width[c]);
  for (std::uint32_t t = 0; t < frames; ++t)
    for (int c = 0; c < kin::kChannelCount; ++c)
      for (std::uint32_t k = 0; k < width[c]; ++k) r.channels[c](t, k) = rd.get<double>();
  kin::validate(r);
  return r;
}

void write_record(const std::filesystem::path& path, const kin::SequenceRecord& r) {
  write_file_atomic(path, encode_record(r));
}

kin::SequenceRecord read_record(const std::filesystem::path& path) {
  try {
    return decode_record(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace hdys::data
