#pragma once

// Little-endian serialization primitives shared by base_codec and edit_codec.
// All on-disk formats are little-endian regardless of host order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "mssz/errors.hpp"

namespace mssz::wire {

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

// Cursor over an input buffer; every read is bounds-checked and raises
// corrupt_archive on underflow.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint64_t remaining() const { return data_.size() - pos_; }
  std::uint64_t pos() const { return pos_; }

  std::uint8_t u8() { return take(1)[0]; }

  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] | (std::uint16_t(b[1]) << 8));
  }

  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::span<const std::uint8_t> bytes(std::uint64_t n) { return take(n); }

 private:
  std::span<const std::uint8_t> take(std::uint64_t n) {
    if (remaining() < n) raise(ErrKind::corrupt_archive, "truncated payload");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> data_;
  std::uint64_t pos_ = 0;
};

}  // namespace mssz::wire
