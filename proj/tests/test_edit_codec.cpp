#include <random>
#include <set>

#include "doctest.h"
#include "mssz/edit_codec.hpp"

using namespace mssz;

namespace {

template <class T>
EditSet<T> random_edits(std::mt19937_64& rng, std::uint64_t universe, std::uint64_t count,
                        bool clustered) {
  std::set<VertexId> picked;
  while (picked.size() < count) {
    if (clustered && !picked.empty() && rng() % 3 != 0) {
      VertexId base = *picked.rbegin();
      if (base + 1 < universe) {
        picked.insert(base + 1);
        continue;
      }
    }
    picked.insert(rng() % universe);
  }
  EditSet<T> edits;
  for (VertexId v : picked) {
    edits.indices.push_back(v);
    edits.values.push_back(static_cast<T>(static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5));
  }
  return edits;
}

}  // namespace

TEST_CASE("delta stream matches the worked example") {
  std::vector<VertexId> indices = {1, 35, 36, 421, 422, 423};
  CHECK(delta_encode(indices) == std::vector<std::uint64_t>{1, 34, 1, 385, 1, 1});
}

TEST_CASE("delta_encode rejects unsorted indices") {
  std::vector<VertexId> bad = {5, 5};
  CHECK_THROWS_AS(delta_encode(bad), Error);
  std::vector<VertexId> bad2 = {7, 3};
  CHECK_THROWS_AS(delta_encode(bad2), Error);
}

TEST_CASE("leb128 round trip including large values") {
  std::vector<std::uint64_t> values = {0, 1, 127, 128, 300, 16383, 16384,
                                       (std::uint64_t(1) << 40) + 7,
                                       ~std::uint64_t(0)};
  CHECK(leb128_decode(leb128_encode(values)) == values);
}

TEST_CASE("rle round trip with runs and marker bytes") {
  std::vector<std::uint8_t> data;
  for (int i = 0; i < 100; ++i) data.push_back(1);
  data.push_back(0xF5);  // the marker itself, as a literal
  for (int i = 0; i < 3; ++i) data.push_back(7);  // short run stays literal
  for (int i = 0; i < 70000; ++i) data.push_back(42);  // run split over u16
  auto encoded = rle_encode(data);
  CHECK(encoded.size() < data.size());
  CHECK(rle_decode(encoded) == data);
}

TEST_CASE("edit payload round trip, both backends and dtypes") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto backend = trial % 2 == 0 ? BackendCodec::store : BackendCodec::deflate;
    auto edits = random_edits<double>(rng, 100000, 1 + rng() % 200, trial % 3 == 0);
    auto payload = encode_edits(edits, backend);
    auto decoded = decode_edits<double>(payload, backend);
    CHECK(decoded.indices == edits.indices);
    CHECK(decoded.values == edits.values);
  }
  for (int trial = 0; trial < 50; ++trial) {
    auto edits = random_edits<float>(rng, 5000, 1 + rng() % 64, true);
    auto payload = encode_edits(edits, BackendCodec::deflate);
    auto decoded = decode_edits<float>(payload, BackendCodec::deflate);
    CHECK(decoded.indices == edits.indices);
    CHECK(decoded.values == edits.values);
  }
}

TEST_CASE("clustered indices encode smaller than the naive layout") {
  std::mt19937_64 rng(29);
  auto edits = random_edits<double>(rng, 1 << 20, 4000, true);
  auto payload = encode_edits(edits, BackendCodec::deflate);
  const std::uint64_t naive = edits.size() * (8 + 8);
  CHECK(payload.size() < naive);
}

TEST_CASE("empty edit set: count 0, both streams empty") {
  EditSet<double> empty;
  auto payload = encode_edits(empty, BackendCodec::deflate);
  CHECK(payload.size() == 16);  // u64 count + u64 index-stream-len
  auto decoded = decode_edits<double>(payload, BackendCodec::deflate);
  CHECK(decoded.empty());
}

TEST_CASE("corrupt edit payloads raise corrupt_archive") {
  std::mt19937_64 rng(31);
  auto edits = random_edits<double>(rng, 1000, 50, false);
  auto payload = encode_edits(edits, BackendCodec::deflate);

  auto expect_corrupt = [](std::vector<std::uint8_t> bytes, BackendCodec codec) {
    try {
      decode_edits<double>(bytes, codec);
      FAIL("expected corrupt_archive");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::corrupt_archive);
    }
  };

  auto truncated = payload;
  truncated.resize(truncated.size() - 8);
  expect_corrupt(truncated, BackendCodec::deflate);

  auto tiny = payload;
  tiny.resize(12);
  expect_corrupt(tiny, BackendCodec::deflate);

  // declaring the wrong backend breaks the stream decode
  expect_corrupt(payload, BackendCodec::store);

  CHECK_THROWS_AS(parse_backend(2), Error);
}

TEST_CASE("archive round trip") {
  Archive archive;
  archive.dtype = DType::f32;
  archive.dims = {48, 32};
  archive.xi = 6.25e-3;
  archive.base_codec = 1;
  archive.base_payload = {1, 2, 3, 4, 5};
  archive.edit_codec = static_cast<std::uint8_t>(BackendCodec::deflate);
  archive.edit_payload = {9, 8, 7};

  auto bytes = write_archive(archive);
  auto back = read_archive(bytes);
  CHECK(back.dtype == archive.dtype);
  CHECK(back.dims == archive.dims);
  CHECK(back.xi == archive.xi);
  CHECK(back.base_codec == archive.base_codec);
  CHECK(back.base_payload == archive.base_payload);
  CHECK(back.edit_codec == archive.edit_codec);
  CHECK(back.edit_payload == archive.edit_payload);
}

TEST_CASE("archive header validation") {
  Archive archive;
  archive.dims = {4, 4};
  archive.xi = 0.5;
  auto bytes = write_archive(archive);

  auto expect_corrupt = [](std::vector<std::uint8_t> data) {
    try {
      read_archive(data);
      FAIL("expected corrupt_archive");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::corrupt_archive);
    }
  };

  expect_corrupt({});  // zero-length

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_corrupt(bad_magic);

  auto bad_version = bytes;
  bad_version[4] += 1;
  expect_corrupt(bad_version);

  auto trailing = bytes;
  trailing.push_back(0);
  expect_corrupt(trailing);
}
