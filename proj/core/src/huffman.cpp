#include "mssz/huffman.hpp"

#include <algorithm>
#include <queue>

#include "mssz/bitstream.hpp"

namespace mssz::huffman {

namespace {

// Depth d needs ~Fib(d) samples, so 57 is unreachable below the topology's
// 2^40 vertex cap; staying under 64 also keeps the first_code arithmetic in
// u64 range.
constexpr int kMaxCodeLength = 57;

struct Node {
  std::uint64_t weight;
  std::uint64_t order;  // creation order for deterministic tie-breaking
  std::int32_t left = -1, right = -1;
  std::int32_t symbol = -1;
};

struct HeavierNode {
  const std::vector<Node>* nodes;
  bool operator()(std::int32_t a, std::int32_t b) const {
    const Node& na = (*nodes)[a];
    const Node& nb = (*nodes)[b];
    if (na.weight != nb.weight) return na.weight > nb.weight;
    return na.order > nb.order;
  }
};

void assign_depths(const std::vector<Node>& nodes, std::int32_t root,
                   std::vector<std::uint8_t>& lengths) {
  // iterative DFS; depth fits in u8 because weights are capped at 2^40-ish
  std::vector<std::pair<std::int32_t, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    const Node& n = nodes[id];
    if (n.symbol >= 0) {
      if (depth > kMaxCodeLength)
        raise(ErrKind::internal, "huffman code length out of range");
      lengths[n.symbol] = static_cast<std::uint8_t>(std::max(depth, 1));
    } else {
      stack.emplace_back(n.left, depth + 1);
      stack.emplace_back(n.right, depth + 1);
    }
  }
}

struct CanonicalTable {
  // per length: number of codes, first code value, offset into ordered symbols
  std::uint32_t count[kMaxCodeLength + 1] = {};
  std::uint64_t first_code[kMaxCodeLength + 1] = {};
  std::uint32_t offset[kMaxCodeLength + 1] = {};
  std::vector<std::uint32_t> symbols;  // ordered by (length, symbol)
  int max_length = 0;
};

CanonicalTable canonicalize(std::span<const std::uint8_t> lengths, bool validate) {
  CanonicalTable t;
  for (std::uint32_t s = 0; s < lengths.size(); ++s) {
    if (lengths[s] == 0) continue;
    if (lengths[s] > kMaxCodeLength)
      raise(ErrKind::corrupt_archive, "huffman length out of range");
    ++t.count[lengths[s]];
    t.max_length = std::max<int>(t.max_length, lengths[s]);
  }
  // Kraft sum must not overflow a prefix code
  std::uint64_t code = 0;
  std::uint32_t total = 0;
  for (int len = 1; len <= t.max_length; ++len) {
    t.first_code[len] = code;
    t.offset[len] = total;
    if (validate && t.count[len] > (std::uint64_t(1) << len) - code)
      raise(ErrKind::corrupt_archive, "huffman table violates prefix property");
    code = (code + t.count[len]) << 1;
    total += t.count[len];
  }
  t.symbols.resize(total);
  std::uint32_t cursor[kMaxCodeLength + 1];
  std::copy(t.offset, t.offset + kMaxCodeLength + 1, cursor);
  for (std::uint32_t s = 0; s < lengths.size(); ++s)
    if (lengths[s] != 0) t.symbols[cursor[lengths[s]]++] = s;
  return t;
}

}  // namespace

std::vector<std::uint8_t> build_code_lengths(std::span<const std::uint64_t> freqs) {
  std::vector<Node> nodes;
  std::priority_queue<std::int32_t, std::vector<std::int32_t>, HeavierNode> heap{
      HeavierNode{&nodes}};
  std::vector<std::uint8_t> lengths(freqs.size(), 0);
  for (std::uint32_t s = 0; s < freqs.size(); ++s) {
    if (freqs[s] == 0) continue;
    nodes.push_back({freqs[s], nodes.size(), -1, -1, static_cast<std::int32_t>(s)});
  }
  const std::size_t leaves = nodes.size();
  if (leaves == 0) return lengths;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(leaves); ++i) heap.push(i);
  while (heap.size() > 1) {
    std::int32_t a = heap.top();
    heap.pop();
    std::int32_t b = heap.top();
    heap.pop();
    nodes.push_back({nodes[a].weight + nodes[b].weight, nodes.size(), a, b, -1});
    heap.push(static_cast<std::int32_t>(nodes.size() - 1));
  }
  assign_depths(nodes, heap.top(), lengths);
  return lengths;
}

void encode_stream(std::span<const std::uint32_t> symbols, std::uint32_t alphabet_size,
                   std::vector<std::uint8_t>& out) {
  std::vector<std::uint64_t> freqs(alphabet_size, 0);
  std::uint32_t max_symbol = 0;
  for (std::uint32_t s : symbols) {
    if (s >= alphabet_size) raise(ErrKind::internal, "symbol outside the declared alphabet");
    ++freqs[s];
    max_symbol = std::max(max_symbol, s);
  }
  const std::uint32_t table_size = symbols.empty() ? 0 : max_symbol + 1;
  freqs.resize(table_size);
  auto lengths = build_code_lengths(freqs);
  auto table = canonicalize(lengths, false);

  // code per symbol, derived from the canonical ordering
  std::vector<std::uint64_t> codes(table_size, 0);
  std::vector<std::uint8_t> code_len(table_size, 0);
  {
    std::uint32_t rank[kMaxCodeLength + 1] = {};
    for (std::uint32_t s : table.symbols) {
      const int len = lengths[s];
      codes[s] = table.first_code[len] + rank[len]++;
      code_len[s] = static_cast<std::uint8_t>(len);
    }
  }

  wire::put_u32(out, static_cast<std::uint32_t>(symbols.size()));
  wire::put_u16(out, static_cast<std::uint16_t>(table_size));
  for (std::uint32_t s = 0; s < table_size; ++s) wire::put_u8(out, lengths[s]);
  BitWriter bits(out);
  for (std::uint32_t s : symbols) bits.put(codes[s], code_len[s]);
  bits.finish();
}

std::vector<std::uint32_t> decode_stream(wire::Reader& in, std::uint32_t alphabet_limit) {
  const std::uint32_t n = in.u32();
  const std::uint32_t table_size = in.u16();
  if (table_size > alphabet_limit)
    raise(ErrKind::corrupt_archive, "huffman table larger than the alphabet");
  std::vector<std::uint8_t> lengths(table_size);
  for (auto& l : lengths) l = in.u8();
  if (n > 0 && table_size == 0)
    raise(ErrKind::corrupt_archive, "huffman stream with empty table");
  auto table = canonicalize(lengths, true);
  if (n > 0 && table.symbols.empty())
    raise(ErrKind::corrupt_archive, "huffman stream with empty table");

  std::vector<std::uint32_t> symbols(n);
  BitReader bits(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t code = 0;
    int len = 0;
    for (;;) {
      code = (code << 1) | static_cast<std::uint64_t>(bits.get_bit());
      ++len;
      if (len > table.max_length)
        raise(ErrKind::corrupt_archive, "invalid huffman code in stream");
      if (table.count[len] != 0 && code - table.first_code[len] < table.count[len]) {
        symbols[i] = table.symbols[table.offset[len] + (code - table.first_code[len])];
        break;
      }
    }
  }
  bits.align();
  return symbols;
}

}  // namespace mssz::huffman
