#pragma once

// Triangulated neighborhood structure of a 2D/3D regular grid.
//
// The grid carries the Freudenthal triangulation with the diagonal along
// +(1,1) / +(1,1,1): every interior 2D vertex has 6 edge neighbors, every
// interior 3D vertex has 14.  Offsets outside the grid are simply absent;
// there are no ghost values, so extrema remain well-defined on boundaries.
//
// All scalar comparisons go through sos_greater, which breaks value ties by
// vertex index (simulation of simplicity).  This makes every field a Morse
// function for the purposes of direction and label computation.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mssz/errors.hpp"

namespace mssz {

using VertexId = std::uint64_t;

struct GridTopology {
  static constexpr int kMaxNeighbors = 14;

  int ndims = 0;                           // 2 or 3
  std::array<std::uint64_t, 3> dims{};     // dims[2] == 1 in 2D
  std::uint64_t vertex_count = 0;

  std::array<std::uint64_t, 3> coords_of(VertexId v) const {
    // row-major, axis 0 fastest
    std::array<std::uint64_t, 3> c{};
    c[0] = v % dims[0];
    c[1] = (v / dims[0]) % dims[1];
    c[2] = v / (dims[0] * dims[1]);
    return c;
  }

  VertexId index_of(std::uint64_t x, std::uint64_t y, std::uint64_t z = 0) const {
    return x + dims[0] * (y + dims[1] * z);
  }

  // Writes the Freudenthal edge neighbors of v into out; returns the count.
  int neighbors(VertexId v, VertexId out[kMaxNeighbors]) const;
};

// Validates dims and builds the topology.  Raises usage on any extent < 2,
// the wrong number of extents, or a vertex count past the address-space cap.
GridTopology build_topology(std::span<const std::uint64_t> dims);

// Strict total order: value first, vertex index as the symbolic tie-break.
template <class T>
inline bool sos_greater(const T* values, VertexId i, VertexId j) {
  if (values[i] != values[j]) return values[i] > values[j];
  return i > j;
}

template <class T>
inline bool sos_less(const T* values, VertexId i, VertexId j) {
  return sos_greater(values, j, i);
}

// Materialized per-vertex adjacency (CSR).  The hot paths use the stencil
// directly; this exists for inspection and the symmetry tests.
struct NeighborList {
  std::vector<std::uint64_t> offsets;  // vertex_count + 1
  std::vector<VertexId> targets;

  std::span<const VertexId> of(VertexId v) const {
    return std::span<const VertexId>(targets).subspan(offsets[v], offsets[v + 1] - offsets[v]);
  }
};

NeighborList build_neighbor_list(const GridTopology& topo);

}  // namespace mssz
