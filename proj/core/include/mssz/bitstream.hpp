#pragma once

// MSB-first bit packing for the canonical Huffman streams.

#include <cstdint>
#include <vector>

#include "mssz/errors.hpp"
#include "mssz/wire.hpp"

namespace mssz {

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint64_t value, int nbits) {
    while (nbits > 24) {
      const int chunk = nbits - 24;
      put_small(value >> chunk, 24);
      value &= (std::uint64_t(1) << chunk) - 1;
      nbits = chunk;
    }
    put_small(value, nbits);
  }

  // byte-pads with zero bits
  void finish() {
    while (fill_ != 0) put_small(0, 1);
  }

 private:
  void put_small(std::uint64_t value, int nbits) {
    acc_ = (acc_ << nbits) | (value & ((std::uint64_t(1) << nbits) - 1));
    fill_ += nbits;
    while (fill_ >= 8) {
      fill_ -= 8;
      out_.push_back(static_cast<std::uint8_t>(acc_ >> fill_));
    }
  }

  std::vector<std::uint8_t>& out_;
  std::uint64_t acc_ = 0;
  int fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(wire::Reader& in) : in_(in) {}

  int get_bit() {
    if (fill_ == 0) {
      acc_ = in_.u8();
      fill_ = 8;
    }
    --fill_;
    return static_cast<int>((acc_ >> fill_) & 1u);
  }

  // discards any buffered bits up to the byte boundary
  void align() { fill_ = 0; }

 private:
  wire::Reader& in_;
  std::uint32_t acc_ = 0;
  int fill_ = 0;
};

}  // namespace mssz
