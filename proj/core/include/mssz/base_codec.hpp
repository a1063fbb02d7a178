#pragma once

// Built-in error-bounded lossy compressor: order-1 Lorenzo prediction from
// already-reconstructed neighbors, linear-scaling quantization with step 2*xi,
// canonical Huffman over the quantization codes, raw literals for escapes.
//
// The compressor returns its own reconstruction; it is bit-identical to what
// decompress_base produces, because both sides run the same prediction and
// reconstruction arithmetic.  The edit engine works against exactly this
// reconstruction.
//
// Payload layout (little-endian):
//   u32 code-count | u16 table-size | u8 bit-length per symbol |
//   bitstream (byte-padded) | u32 literal-count | raw literal values
//
// Symbol 0 is the literal escape; code q maps to 1 + zigzag(q).  |q| is
// capped at 32766 so the dense symbol table size fits in the u16 field;
// larger residuals escape to literals.

#include <cstdint>
#include <span>
#include <vector>

#include "mssz/field.hpp"
#include "mssz/grid.hpp"

namespace mssz {

template <class T>
struct BaseCompressResult {
  std::vector<std::uint8_t> payload;
  std::vector<T> reconstruction;  // fhat, |f - fhat| <= xi pointwise
};

template <class T>
BaseCompressResult<T> compress_base(const GridTopology& topo, const T* values, double xi);

template <class T>
std::vector<T> decompress_base(std::span<const std::uint8_t> payload, const GridTopology& topo,
                               double xi);

}  // namespace mssz
