#pragma once

// Lossless serialization of the edit set and the self-describing archive.
//
// EditPayload layout (little-endian):
//   u64 count | u64 index-stream-len | index bytes | value bytes
//
// The index stream is the sorted vertex indices as first-absolute-then-delta
// integers, LEB128-encoded, run-length folded (runs >= 4 of one byte), then
// canonical-Huffman coded; the value stream is the raw little-endian edited
// values in index order.  Both streams pass through the backend stage last
// (0 = store, 1 = DEFLATE / RFC 1951).
//
// Archive layout (little-endian):
//   magic "MSSZ" | u8 version=1 | u8 dtype (0=f32,1=f64) | u8 ndims |
//   u64 dims[ndims] | f64 xi | u8 base-codec (0=external/none,1=builtin) |
//   u64 base-len | base bytes | u8 edit-codec | u64 edit-len | edit bytes

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mssz/edit_engine.hpp"
#include "mssz/field.hpp"

namespace mssz {

enum class BackendCodec : std::uint8_t { store = 0, deflate = 1 };
BackendCodec parse_backend(std::uint8_t id);

// Building blocks, exposed for the codec tests.
std::vector<std::uint64_t> delta_encode(std::span<const VertexId> indices);
std::vector<std::uint8_t> leb128_encode(std::span<const std::uint64_t> values);
std::vector<std::uint64_t> leb128_decode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> rle_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> rle_decode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> backend_encode(std::span<const std::uint8_t> bytes, BackendCodec codec);
std::vector<std::uint8_t> backend_decode(std::span<const std::uint8_t> bytes, BackendCodec codec,
                                         std::uint64_t expected_size);

template <class T>
std::vector<std::uint8_t> encode_edits(const EditSet<T>& edits, BackendCodec codec);

template <class T>
EditSet<T> decode_edits(std::span<const std::uint8_t> payload, BackendCodec codec);

struct Archive {
  DType dtype = DType::f64;
  std::vector<std::uint64_t> dims;
  double xi = 0.0;
  std::uint8_t base_codec = 0;  // 0 = external/none, 1 = builtin
  std::vector<std::uint8_t> base_payload;
  std::uint8_t edit_codec = 0;  // BackendCodec id of the edit payload
  std::vector<std::uint8_t> edit_payload;
};

std::vector<std::uint8_t> write_archive(const Archive& archive);
Archive read_archive(std::span<const std::uint8_t> bytes);

void write_archive_file(const Archive& archive, const std::filesystem::path& path);
Archive read_archive_file(const std::filesystem::path& path);

}  // namespace mssz
