#pragma once

// Scalar-field container, raw binary I/O, error-bound resolution, and the
// synthetic generators used by tests and the bench harness.
//
// Raw interchange format: contiguous little-endian values, row-major with
// axis 0 fastest, no header.  dims/dtype travel out-of-band (CLI flags),
// matching how SZ3/ZFP workflows pass raw arrays around.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mssz/grid.hpp"

namespace mssz {

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

inline std::size_t dtype_size(DType t) { return t == DType::f32 ? 4 : 8; }
inline const char* dtype_name(DType t) { return t == DType::f32 ? "f32" : "f64"; }
DType parse_dtype(const std::string& name);

template <class T>
struct Field {
  GridTopology topo;
  std::vector<T> values;

  const T* data() const { return values.data(); }
  T* data() { return values.data(); }
  std::uint64_t size() const { return topo.vertex_count; }
};

struct ErrorBound {
  enum class Mode { absolute, relative };
  Mode mode = Mode::absolute;
  double magnitude = 0.0;
};

ErrorBound::Mode parse_eb_mode(const std::string& name);

// Absolute xi for this field: absolute -> magnitude, relative -> magnitude
// scaled by the field's global value range.  Raises usage on a non-positive
// magnitude or a relative bound over a constant field.
template <class T>
double resolve_bound(const ErrorBound& eb, const Field<T>& field);

// Little-endian decode; file size must equal vertex_count * sizeof(T) and the
// data must be finite (NaN/Inf have no meaningful SoS order).
template <class T>
Field<T> load_raw(const std::filesystem::path& path, std::span<const std::uint64_t> dims);

template <class T>
void store_raw(const Field<T>& field, const std::filesystem::path& path);

// In-memory (de)serialization used by the raw file I/O and by tests.
template <class T>
std::vector<std::uint8_t> field_to_bytes(const Field<T>& field);
template <class T>
Field<T> field_from_bytes(std::span<const std::uint8_t> bytes,
                          std::span<const std::uint64_t> dims);

enum class SyntheticKind { gaussian_mixture, trig, random_smooth };
SyntheticKind parse_synthetic_kind(const std::string& name);

// Deterministic in (kind, dims, seed); all randomness comes from an explicit
// seeded generator, so outputs are bit-stable across platforms.
template <class T>
Field<T> generate_synthetic(SyntheticKind kind, std::span<const std::uint64_t> dims,
                            std::uint64_t seed);

template <class T>
void value_range(const Field<T>& field, double& lo, double& hi);

}  // namespace mssz
