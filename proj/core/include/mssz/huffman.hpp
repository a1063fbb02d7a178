#pragma once

// Canonical Huffman coding of a symbol stream.
//
// Stream framing (little-endian, shared by the base codec's quantization
// stream and the edit codec's index stream):
//
//   u32 symbol-stream length
//   u16 table size S (table is dense over symbols [0, S))
//   u8  code bit-length per symbol, 0 = symbol unused
//   bitstream, MSB-first, zero-padded to a byte boundary
//
// Codes are assigned canonically: symbols ordered by (length, symbol id),
// numbering from 0 at each length.  Only the lengths are stored; both sides
// rebuild identical codes.

#include <cstdint>
#include <span>
#include <vector>

#include "mssz/wire.hpp"

namespace mssz::huffman {

// Length assignment for the given frequencies (index = symbol).  Symbols with
// zero frequency get length 0.  Deterministic: ties merge in creation order.
std::vector<std::uint8_t> build_code_lengths(std::span<const std::uint64_t> freqs);

void encode_stream(std::span<const std::uint32_t> symbols, std::uint32_t alphabet_size,
                   std::vector<std::uint8_t>& out);

// Reads one framed stream at the reader's cursor.  alphabet_limit guards the
// table size; anything malformed raises corrupt_archive.
std::vector<std::uint32_t> decode_stream(wire::Reader& in, std::uint32_t alphabet_limit);

}  // namespace mssz::huffman
