#include "mssz/base_codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "mssz/huffman.hpp"

namespace mssz {

namespace {

constexpr std::int64_t kQuantRadius = 32766;
constexpr std::uint32_t kEscapeSymbol = 0;
constexpr std::uint32_t kAlphabetSize = 2 + 2 * static_cast<std::uint32_t>(kQuantRadius);

std::uint32_t zigzag(std::int64_t q) {
  return static_cast<std::uint32_t>(q >= 0 ? 2 * q : -2 * q - 1);
}

std::int64_t unzigzag(std::uint32_t z) {
  return (z & 1) ? -static_cast<std::int64_t>((z + 1) / 2) : static_cast<std::int64_t>(z / 2);
}

// Order-1 Lorenzo from the reconstructed array; out-of-grid terms are 0.
template <class T>
double lorenzo_predict(const GridTopology& topo, const T* recon, VertexId v) {
  const auto c = topo.coords_of(v);
  const std::uint64_t sx = 1, sy = topo.dims[0], sz = topo.dims[0] * topo.dims[1];
  const bool hx = c[0] > 0, hy = c[1] > 0;
  auto at = [&](std::uint64_t off) { return static_cast<double>(recon[v - off]); };
  if (topo.ndims == 2) {
    double p = 0.0;
    if (hx) p += at(sx);
    if (hy) p += at(sy);
    if (hx && hy) p -= at(sx + sy);
    return p;
  }
  const bool hz = c[2] > 0;
  double p = 0.0;
  if (hx) p += at(sx);
  if (hy) p += at(sy);
  if (hz) p += at(sz);
  if (hx && hy) p -= at(sx + sy);
  if (hy && hz) p -= at(sy + sz);
  if (hx && hz) p -= at(sx + sz);
  if (hx && hy && hz) p += at(sx + sy + sz);
  return p;
}

template <class T>
T reconstruct(double pred, double two_xi, std::int64_t q) {
  return static_cast<T>(pred + two_xi * static_cast<double>(q));
}

template <class T>
using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

template <class T>
void put_value(std::vector<std::uint8_t>& out, T v) {
  Bits<T> bits = std::bit_cast<Bits<T>>(v);
  for (std::size_t b = 0; b < sizeof(T); ++b)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

template <class T>
T get_value(wire::Reader& in) {
  auto bytes = in.bytes(sizeof(T));
  Bits<T> bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= Bits<T>(bytes[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

}  // namespace

template <class T>
BaseCompressResult<T> compress_base(const GridTopology& topo, const T* values, double xi) {
  if (!(xi > 0.0)) raise(ErrKind::usage, "compress_base requires xi > 0");
  const std::uint64_t n = topo.vertex_count;
  const double two_xi = 2.0 * xi;

  BaseCompressResult<T> result;
  result.reconstruction.resize(n);
  std::vector<std::uint32_t> symbols(n);
  std::vector<T> literals;

  for (VertexId v = 0; v < n; ++v) {
    const double f = static_cast<double>(values[v]);
    if (!std::isfinite(f)) raise(ErrKind::io, "compress_base: non-finite value");
    const double pred = lorenzo_predict(topo, result.reconstruction.data(), v);
    const double residual_steps = (f - pred) / two_xi;
    std::int64_t q = 0;
    bool escape = !(std::fabs(residual_steps) <= static_cast<double>(kQuantRadius) + 1.0);
    if (!escape) {
      q = std::llround(residual_steps);
      escape = std::llabs(q) > kQuantRadius;
    }
    T recon{};
    if (!escape) {
      recon = reconstruct<T>(pred, two_xi, q);
      // quantization guarantees the bound in exact arithmetic; float rounding
      // can still break it marginally, in which case the value escapes
      escape = !(std::abs(f - static_cast<double>(recon)) <= xi) ||
               !std::isfinite(static_cast<double>(recon));
    }
    if (escape) {
      symbols[v] = kEscapeSymbol;
      literals.push_back(values[v]);
      result.reconstruction[v] = values[v];
    } else {
      symbols[v] = 1 + zigzag(q);
      result.reconstruction[v] = recon;
    }
  }

  huffman::encode_stream(symbols, kAlphabetSize, result.payload);
  wire::put_u32(result.payload, static_cast<std::uint32_t>(literals.size()));
  for (T lit : literals) put_value(result.payload, lit);
  return result;
}

template <class T>
std::vector<T> decompress_base(std::span<const std::uint8_t> payload, const GridTopology& topo,
                               double xi) {
  if (!(xi > 0.0)) raise(ErrKind::usage, "decompress_base requires xi > 0");
  wire::Reader in(payload);
  auto symbols = huffman::decode_stream(in, kAlphabetSize);
  if (symbols.size() != topo.vertex_count)
    raise(ErrKind::corrupt_archive, "code count does not match the grid");
  const std::uint32_t literal_count = in.u32();
  if (in.remaining() != std::uint64_t(literal_count) * sizeof(T))
    raise(ErrKind::corrupt_archive, "literal section size mismatch");

  std::vector<T> recon(topo.vertex_count);
  const double two_xi = 2.0 * xi;
  std::uint32_t literals_used = 0;
  for (VertexId v = 0; v < topo.vertex_count; ++v) {
    if (symbols[v] == kEscapeSymbol) {
      if (literals_used >= literal_count)
        raise(ErrKind::corrupt_archive, "literal stream exhausted");
      recon[v] = get_value<T>(in);
      ++literals_used;
    } else {
      const std::int64_t q = unzigzag(symbols[v] - 1);
      const double pred = lorenzo_predict(topo, recon.data(), v);
      recon[v] = reconstruct<T>(pred, two_xi, q);
    }
  }
  if (literals_used != literal_count)
    raise(ErrKind::corrupt_archive, "unused literals in payload");
  return recon;
}

template BaseCompressResult<float> compress_base<float>(const GridTopology&, const float*,
                                                        double);
template BaseCompressResult<double> compress_base<double>(const GridTopology&, const double*,
                                                          double);
template std::vector<float> decompress_base<float>(std::span<const std::uint8_t>,
                                                   const GridTopology&, double);
template std::vector<double> decompress_base<double>(std::span<const std::uint8_t>,
                                                     const GridTopology&, double);

}  // namespace mssz
