#include "mssz/edit_codec.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "mssz/huffman.hpp"

namespace mssz {

namespace {

constexpr std::uint8_t kRleMarker = 0xF5;
constexpr std::uint32_t kRleMinRun = 4;
constexpr char kMagic[4] = {'M', 'S', 'S', 'Z'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

BackendCodec parse_backend(std::uint8_t id) {
  if (id > 1) raise(ErrKind::corrupt_archive, "unsupported edit backend codec id");
  return static_cast<BackendCodec>(id);
}

std::vector<std::uint64_t> delta_encode(std::span<const VertexId> indices) {
  std::vector<std::uint64_t> deltas(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k == 0) {
      deltas[0] = indices[0];
    } else {
      if (indices[k] <= indices[k - 1])
        raise(ErrKind::usage, "edit indices must be strictly increasing");
      deltas[k] = indices[k] - indices[k - 1];
    }
  }
  return deltas;
}

std::vector<std::uint8_t> leb128_encode(std::span<const std::uint64_t> values) {
  std::vector<std::uint8_t> out;
  for (std::uint64_t v : values) {
    while (v >= 0x80) {
      out.push_back(static_cast<std::uint8_t>(v) | 0x80);
      v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::vector<std::uint64_t> leb128_decode(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint64_t> out;
  std::uint64_t value = 0;
  int shift = 0;
  for (std::uint8_t b : bytes) {
    if (shift >= 64) raise(ErrKind::corrupt_archive, "varint overflow");
    value |= std::uint64_t(b & 0x7F) << shift;
    if (b & 0x80) {
      shift += 7;
    } else {
      out.push_back(value);
      value = 0;
      shift = 0;
    }
  }
  if (shift != 0) raise(ErrKind::corrupt_archive, "truncated varint");
  return out;
}

std::vector<std::uint8_t> rle_encode(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> out;
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::uint8_t b = bytes[i];
    std::size_t run = 1;
    while (i + run < bytes.size() && bytes[i + run] == b && run < 65535) ++run;
    if (run >= kRleMinRun || b == kRleMarker) {
      out.push_back(kRleMarker);
      out.push_back(b);
      out.push_back(static_cast<std::uint8_t>(run));
      out.push_back(static_cast<std::uint8_t>(run >> 8));
    } else {
      out.insert(out.end(), run, b);
    }
    i += run;
  }
  return out;
}

std::vector<std::uint8_t> rle_decode(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> out;
  std::size_t i = 0;
  while (i < bytes.size()) {
    if (bytes[i] == kRleMarker) {
      if (i + 4 > bytes.size()) raise(ErrKind::corrupt_archive, "truncated RLE run");
      const std::uint8_t b = bytes[i + 1];
      const std::uint32_t run = bytes[i + 2] | (std::uint32_t(bytes[i + 3]) << 8);
      if (run == 0) raise(ErrKind::corrupt_archive, "zero-length RLE run");
      out.insert(out.end(), run, b);
      i += 4;
    } else {
      out.push_back(bytes[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::uint8_t> backend_encode(std::span<const std::uint8_t> bytes,
                                         BackendCodec codec) {
  if (codec == BackendCodec::store)
    return std::vector<std::uint8_t>(bytes.begin(), bytes.end());

  z_stream zs{};
  // windowBits -15: raw DEFLATE, no zlib wrapper
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    raise(ErrKind::internal, "deflateInit failed");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())));
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) raise(ErrKind::internal, "deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::vector<std::uint8_t> backend_decode(std::span<const std::uint8_t> bytes, BackendCodec codec,
                                         std::uint64_t expected_size) {
  if (codec == BackendCodec::store) {
    if (bytes.size() != expected_size)
      raise(ErrKind::corrupt_archive, "stored stream has the wrong length");
    return std::vector<std::uint8_t>(bytes.begin(), bytes.end());
  }

  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) raise(ErrKind::internal, "inflateInit failed");
  std::vector<std::uint8_t> out(expected_size);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::uint64_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected_size)
    raise(ErrKind::corrupt_archive, "inflate failed or produced the wrong length");
  return out;
}

namespace {

// Inflate when the decoded size is unknown (the index stream): grow-and-retry.
std::vector<std::uint8_t> backend_decode_unsized(std::span<const std::uint8_t> bytes,
                                                 BackendCodec codec) {
  if (codec == BackendCodec::store)
    return std::vector<std::uint8_t>(bytes.begin(), bytes.end());
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) raise(ErrKind::internal, "inflateInit failed");
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[16384];
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  do {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      raise(ErrKind::corrupt_archive, "inflate failed on index stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

template <class T>
using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

}  // namespace

template <class T>
std::vector<std::uint8_t> encode_edits(const EditSet<T>& edits, BackendCodec codec) {
  if (edits.indices.size() != edits.values.size())
    raise(ErrKind::usage, "edit set index/value length mismatch");
  std::vector<std::uint8_t> payload;
  wire::put_u64(payload, edits.size());
  if (edits.empty()) {
    wire::put_u64(payload, 0);  // index-stream-len
    return payload;
  }

  const auto deltas = delta_encode(edits.indices);
  const auto varints = leb128_encode(deltas);
  const auto rle = rle_encode(varints);
  std::vector<std::uint8_t> huffed;
  {
    std::vector<std::uint32_t> symbols(rle.begin(), rle.end());
    huffman::encode_stream(symbols, 256, huffed);
  }
  const auto index_stream = backend_encode(huffed, codec);

  std::vector<std::uint8_t> value_bytes;
  value_bytes.reserve(edits.size() * sizeof(T));
  for (T v : edits.values) {
    Bits<T> bits = std::bit_cast<Bits<T>>(v);
    for (std::size_t b = 0; b < sizeof(T); ++b)
      value_bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  const auto value_stream = backend_encode(value_bytes, codec);

  wire::put_u64(payload, index_stream.size());
  payload.insert(payload.end(), index_stream.begin(), index_stream.end());
  payload.insert(payload.end(), value_stream.begin(), value_stream.end());
  return payload;
}

template <class T>
EditSet<T> decode_edits(std::span<const std::uint8_t> payload, BackendCodec codec) {
  wire::Reader in(payload);
  const std::uint64_t count = in.u64();
  const std::uint64_t index_len = in.u64();
  EditSet<T> edits;
  if (count == 0) {
    if (index_len != 0 || in.remaining() != 0)
      raise(ErrKind::corrupt_archive, "empty edit set with trailing bytes");
    return edits;
  }

  const auto index_stream = in.bytes(index_len);
  const auto huffed = backend_decode_unsized(index_stream, codec);
  wire::Reader hin(huffed);
  const auto symbols = huffman::decode_stream(hin, 256);
  if (hin.remaining() != 0) raise(ErrKind::corrupt_archive, "trailing bytes in index stream");
  std::vector<std::uint8_t> rle(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i)
    rle[i] = static_cast<std::uint8_t>(symbols[i]);
  const auto varints = rle_decode(rle);
  const auto deltas = leb128_decode(varints);
  if (deltas.size() != count)
    raise(ErrKind::corrupt_archive, "edit index count mismatch");

  edits.indices.resize(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    if (k == 0) {
      edits.indices[0] = deltas[0];
    } else {
      if (deltas[k] == 0) raise(ErrKind::corrupt_archive, "non-increasing edit indices");
      edits.indices[k] = edits.indices[k - 1] + deltas[k];
    }
  }

  const auto value_stream = in.bytes(in.remaining());
  const auto value_bytes = backend_decode(value_stream, codec, count * sizeof(T));
  edits.values.resize(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Bits<T> bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b)
      bits |= Bits<T>(value_bytes[k * sizeof(T) + b]) << (8 * b);
    edits.values[k] = std::bit_cast<T>(bits);
  }
  return edits;
}

std::vector<std::uint8_t> write_archive(const Archive& archive) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  wire::put_u8(out, kVersion);
  wire::put_u8(out, static_cast<std::uint8_t>(archive.dtype));
  wire::put_u8(out, static_cast<std::uint8_t>(archive.dims.size()));
  for (std::uint64_t d : archive.dims) wire::put_u64(out, d);
  wire::put_f64(out, archive.xi);
  wire::put_u8(out, archive.base_codec);
  wire::put_u64(out, archive.base_payload.size());
  out.insert(out.end(), archive.base_payload.begin(), archive.base_payload.end());
  wire::put_u8(out, archive.edit_codec);
  wire::put_u64(out, archive.edit_payload.size());
  out.insert(out.end(), archive.edit_payload.begin(), archive.edit_payload.end());
  return out;
}

Archive read_archive(std::span<const std::uint8_t> bytes) {
  wire::Reader in(bytes);
  const auto magic = in.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    raise(ErrKind::corrupt_archive, "bad magic (not an MSSZ archive)");
  const std::uint8_t version = in.u8();
  if (version != kVersion)
    raise(ErrKind::corrupt_archive,
          "unsupported archive version " + std::to_string(version));
  Archive archive;
  const std::uint8_t dtype = in.u8();
  if (dtype > 1) raise(ErrKind::corrupt_archive, "unknown dtype id");
  archive.dtype = static_cast<DType>(dtype);
  const std::uint8_t ndims = in.u8();
  if (ndims != 2 && ndims != 3) raise(ErrKind::corrupt_archive, "archive ndims must be 2 or 3");
  archive.dims.resize(ndims);
  for (auto& d : archive.dims) d = in.u64();
  archive.xi = in.f64();
  archive.base_codec = in.u8();
  if (archive.base_codec > 1) raise(ErrKind::corrupt_archive, "unknown base codec id");
  const std::uint64_t base_len = in.u64();
  auto base = in.bytes(base_len);
  archive.base_payload.assign(base.begin(), base.end());
  archive.edit_codec = in.u8();
  parse_backend(archive.edit_codec);
  const std::uint64_t edit_len = in.u64();
  auto edit = in.bytes(edit_len);
  archive.edit_payload.assign(edit.begin(), edit.end());
  if (in.remaining() != 0) raise(ErrKind::corrupt_archive, "trailing bytes after archive");
  return archive;
}

void write_archive_file(const Archive& archive, const std::filesystem::path& path) {
  const auto bytes = write_archive(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrKind::io, "write failed on '" + path.string() + "'");
}

Archive read_archive_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrKind::io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_archive(bytes);
}

template std::vector<std::uint8_t> encode_edits<float>(const EditSet<float>&, BackendCodec);
template std::vector<std::uint8_t> encode_edits<double>(const EditSet<double>&, BackendCodec);
template EditSet<float> decode_edits<float>(std::span<const std::uint8_t>, BackendCodec);
template EditSet<double> decode_edits<double>(std::span<const std::uint8_t>, BackendCodec);

}  // namespace mssz
