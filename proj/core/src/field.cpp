#include "mssz/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace mssz {

DType parse_dtype(const std::string& name) {
  if (name == "f32" || name == "float" || name == "float32") return DType::f32;
  if (name == "f64" || name == "double" || name == "float64") return DType::f64;
  raise(ErrKind::usage, "unknown dtype '" + name + "' (expected f32 or f64)");
}

ErrorBound::Mode parse_eb_mode(const std::string& name) {
  if (name == "abs" || name == "absolute") return ErrorBound::Mode::absolute;
  if (name == "rel" || name == "relative") return ErrorBound::Mode::relative;
  raise(ErrKind::usage, "unknown eb mode '" + name + "' (expected abs or rel)");
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "gaussian-mixture") return SyntheticKind::gaussian_mixture;
  if (name == "trig") return SyntheticKind::trig;
  if (name == "random-smooth") return SyntheticKind::random_smooth;
  raise(ErrKind::usage, "unknown synthetic kind '" + name + "'");
}

template <class T>
void value_range(const Field<T>& field, double& lo, double& hi) {
  lo = static_cast<double>(field.values[0]);
  hi = lo;
  for (T v : field.values) {
    double d = static_cast<double>(v);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
}

template <class T>
double resolve_bound(const ErrorBound& eb, const Field<T>& field) {
  if (!(eb.magnitude > 0.0)) raise(ErrKind::usage, "error bound must be > 0");
  if (eb.mode == ErrorBound::Mode::absolute) return eb.magnitude;
  double lo, hi;
  value_range(field, lo, hi);
  if (hi == lo) raise(ErrKind::usage, "relative bound over a constant field (zero range)");
  return eb.magnitude * (hi - lo);
}

namespace {

template <class T>
using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

template <class T>
void check_finite(const std::vector<T>& values) {
  for (T v : values)
    if (!std::isfinite(static_cast<double>(v)))
      raise(ErrKind::io, "field contains NaN/Inf");
}

}  // namespace

template <class T>
std::vector<std::uint8_t> field_to_bytes(const Field<T>& field) {
  std::vector<std::uint8_t> out(field.values.size() * sizeof(T));
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    Bits<T> bits = std::bit_cast<Bits<T>>(field.values[i]);
    for (std::size_t b = 0; b < sizeof(T); ++b)
      out[i * sizeof(T) + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

template <class T>
Field<T> field_from_bytes(std::span<const std::uint8_t> bytes,
                          std::span<const std::uint64_t> dims) {
  Field<T> field;
  field.topo = build_topology(dims);
  if (bytes.size() != field.topo.vertex_count * sizeof(T))
    raise(ErrKind::io, "byte count does not match dims * element size");
  field.values.resize(field.topo.vertex_count);
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    Bits<T> bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b)
      bits |= Bits<T>(bytes[i * sizeof(T) + b]) << (8 * b);
    field.values[i] = std::bit_cast<T>(bits);
  }
  check_finite(field.values);
  return field;
}

template <class T>
Field<T> load_raw(const std::filesystem::path& path, std::span<const std::uint64_t> dims) {
  GridTopology topo = build_topology(dims);  // validate dims before touching the file
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrKind::io, "cannot open '" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t want = topo.vertex_count * sizeof(T);
  if (file_size != want)
    raise(ErrKind::io, "'" + path.string() + "': file size " + std::to_string(file_size) +
                           " does not match dims (" + std::to_string(want) + " bytes expected)");
  in.seekg(0);
  std::vector<std::uint8_t> bytes(want);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(want));
  if (!in) raise(ErrKind::io, "read failed on '" + path.string() + "'");
  return field_from_bytes<T>(bytes, dims);
}

template <class T>
void store_raw(const Field<T>& field, const std::filesystem::path& path) {
  if (path.empty()) raise(ErrKind::io, "empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrKind::io, "cannot open '" + path.string() + "' for writing");
  auto bytes = field_to_bytes(field);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrKind::io, "write failed on '" + path.string() + "'");
}

namespace {

// Platform-stable uniform in [0,1): std::uniform_real_distribution is not
// bit-reproducible across standard libraries, so draw mantissa bits directly.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * next_unit(rng);
}

std::vector<double> gaussian_mixture_values(const GridTopology& topo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int k = 5 + static_cast<int>(seed % 6);
  struct Bump {
    double center[3];
    double inv_two_sigma2;
    double amplitude;
  };
  std::vector<Bump> bumps(k);
  const double min_extent = static_cast<double>(
      std::min({topo.dims[0], topo.dims[1], topo.ndims == 3 ? topo.dims[2] : topo.dims[1]}));
  for (auto& b : bumps) {
    for (int a = 0; a < 3; ++a) {
      double extent = static_cast<double>(topo.dims[a]);
      b.center[a] = (topo.ndims == 2 && a == 2) ? 0.0 : next_in(rng, 0.15, 0.85) * (extent - 1);
    }
    double sigma = next_in(rng, 0.08, 0.25) * min_extent;
    b.inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    double amp = next_in(rng, 0.4, 1.2);
    b.amplitude = (next_unit(rng) < 0.25) ? -amp : amp;
  }
  std::vector<double> values(topo.vertex_count);
  for (VertexId v = 0; v < topo.vertex_count; ++v) {
    const auto c = topo.coords_of(v);
    double sum = 0.0;
    for (const auto& b : bumps) {
      double d2 = 0.0;
      for (int a = 0; a < topo.ndims; ++a) {
        double d = static_cast<double>(c[a]) - b.center[a];
        d2 += d * d;
      }
      sum += b.amplitude * std::exp(-d2 * b.inv_two_sigma2);
    }
    values[v] = sum;
  }
  return values;
}

std::vector<double> trig_values(const GridTopology& topo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double two_pi = 6.283185307179586476925286766559;
  double freq[3], phase[3];
  for (int a = 0; a < 3; ++a) {
    freq[a] = 1.5 + 0.7 * static_cast<double>(seed % 5) + 0.3 * next_unit(rng);
    phase[a] = two_pi * next_unit(rng);
  }
  std::vector<double> values(topo.vertex_count);
  for (VertexId v = 0; v < topo.vertex_count; ++v) {
    const auto c = topo.coords_of(v);
    double prod = 1.0;
    for (int a = 0; a < topo.ndims; ++a) {
      double x = static_cast<double>(c[a]) / static_cast<double>(topo.dims[a] - 1);
      double arg = two_pi * freq[a] * x + phase[a];
      prod *= (a % 2 == 0) ? std::sin(arg) : std::cos(arg);
    }
    values[v] = prod;
  }
  return values;
}

std::vector<double> random_smooth_values(const GridTopology& topo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> values(topo.vertex_count);
  for (auto& v : values) v = next_in(rng, -1.0, 1.0);
  // three box-filter passes, each a 3-tap mean along every axis, clipped at
  // the boundary
  std::vector<double> tmp(topo.vertex_count);
  for (int pass = 0; pass < 3; ++pass) {
    for (int axis = 0; axis < topo.ndims; ++axis) {
      std::uint64_t stride = 1;
      for (int a = 0; a < axis; ++a) stride *= topo.dims[a];
      for (VertexId v = 0; v < topo.vertex_count; ++v) {
        const auto c = topo.coords_of(v);
        double sum = values[v];
        int n = 1;
        if (c[axis] > 0) {
          sum += values[v - stride];
          ++n;
        }
        if (c[axis] + 1 < topo.dims[axis]) {
          sum += values[v + stride];
          ++n;
        }
        tmp[v] = sum / n;
      }
      values.swap(tmp);
    }
  }
  return values;
}

}  // namespace

template <class T>
Field<T> generate_synthetic(SyntheticKind kind, std::span<const std::uint64_t> dims,
                            std::uint64_t seed) {
  Field<T> field;
  field.topo = build_topology(dims);
  std::vector<double> values;
  switch (kind) {
    case SyntheticKind::gaussian_mixture:
      values = gaussian_mixture_values(field.topo, seed);
      break;
    case SyntheticKind::trig:
      values = trig_values(field.topo, seed);
      break;
    case SyntheticKind::random_smooth:
      values = random_smooth_values(field.topo, seed);
      break;
  }
  field.values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    field.values[i] = static_cast<T>(values[i]);
  return field;
}

template void value_range<float>(const Field<float>&, double&, double&);
template void value_range<double>(const Field<double>&, double&, double&);
template double resolve_bound<float>(const ErrorBound&, const Field<float>&);
template double resolve_bound<double>(const ErrorBound&, const Field<double>&);
template std::vector<std::uint8_t> field_to_bytes<float>(const Field<float>&);
template std::vector<std::uint8_t> field_to_bytes<double>(const Field<double>&);
template Field<float> field_from_bytes<float>(std::span<const std::uint8_t>,
                                              std::span<const std::uint64_t>);
template Field<double> field_from_bytes<double>(std::span<const std::uint8_t>,
                                                std::span<const std::uint64_t>);
template Field<float> load_raw<float>(const std::filesystem::path&,
                                      std::span<const std::uint64_t>);
template Field<double> load_raw<double>(const std::filesystem::path&,
                                        std::span<const std::uint64_t>);
template void store_raw<float>(const Field<float>&, const std::filesystem::path&);
template void store_raw<double>(const Field<double>&, const std::filesystem::path&);
template Field<float> generate_synthetic<float>(SyntheticKind, std::span<const std::uint64_t>,
                                                std::uint64_t);
template Field<double> generate_synthetic<double>(SyntheticKind, std::span<const std::uint64_t>,
                                                  std::uint64_t);

}  // namespace mssz
