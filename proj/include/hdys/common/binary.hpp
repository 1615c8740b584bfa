#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "hdys/common/error.hpp"

namespace hdys {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// Appends fixed-width little-endian fields to a byte string.
class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void raw(std::string_view s) { bytes_.append(s); }
  void str(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  void doubles(const double* p, std::size_t n) { bytes_.append(reinterpret_cast<const char*>(p), n * sizeof(double)); }
  std::string take() { return std::move(bytes_); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

/// Bounds-checked reader; throws FormatError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return std::string(raw(get<std::uint32_t>())); }
  void doubles(double* p, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(p, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated data");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace hdys
