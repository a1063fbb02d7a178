#include "mssz/grid.hpp"

namespace mssz {

namespace {

// Freudenthal stencil offsets, diagonal along the main axis direction.
constexpr int kOffsets2d[6][3] = {
    {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {1, 1, 0}, {-1, -1, 0},
};

constexpr int kOffsets3d[14][3] = {
    {1, 0, 0},  {-1, 0, 0},  {0, 1, 0},  {0, -1, 0},  {0, 0, 1},   {0, 0, -1},
    {1, 1, 0},  {-1, -1, 0}, {0, 1, 1},  {0, -1, -1}, {1, 0, 1},   {-1, 0, -1},
    {1, 1, 1},  {-1, -1, -1},
};

// Keeps vertex_count * sizeof(double) and the u64 label arrays addressable.
constexpr std::uint64_t kMaxVertices = std::uint64_t(1) << 40;

}  // namespace

int GridTopology::neighbors(VertexId v, VertexId out[kMaxNeighbors]) const {
  const auto c = coords_of(v);
  const auto& offsets = (ndims == 2) ? kOffsets2d : kOffsets3d;
  const int stencil = (ndims == 2) ? 6 : 14;
  int n = 0;
  for (int k = 0; k < stencil; ++k) {
    // unsigned wraparound makes x < dims[a] also reject coordinate -1
    std::uint64_t x = c[0] + static_cast<std::uint64_t>(offsets[k][0]);
    std::uint64_t y = c[1] + static_cast<std::uint64_t>(offsets[k][1]);
    std::uint64_t z = c[2] + static_cast<std::uint64_t>(offsets[k][2]);
    if (x >= dims[0] || y >= dims[1] || z >= dims[2]) continue;
    out[n++] = index_of(x, y, z);
  }
  return n;
}

GridTopology build_topology(std::span<const std::uint64_t> dims) {
  if (dims.size() != 2 && dims.size() != 3)
    raise(ErrKind::usage, "dims must have 2 or 3 extents");
  GridTopology topo;
  topo.ndims = static_cast<int>(dims.size());
  topo.dims = {1, 1, 1};
  std::uint64_t count = 1;
  for (size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 2) raise(ErrKind::usage, "every grid extent must be >= 2");
    if (dims[a] > kMaxVertices / count)
      raise(ErrKind::usage, "grid exceeds the address-space cap");
    topo.dims[a] = dims[a];
    count *= dims[a];
  }
  topo.vertex_count = count;
  return topo;
}

NeighborList build_neighbor_list(const GridTopology& topo) {
  NeighborList list;
  list.offsets.resize(topo.vertex_count + 1, 0);
  VertexId buf[GridTopology::kMaxNeighbors];
  for (VertexId v = 0; v < topo.vertex_count; ++v)
    list.offsets[v + 1] = list.offsets[v] + topo.neighbors(v, buf);
  list.targets.resize(list.offsets.back());
  for (VertexId v = 0; v < topo.vertex_count; ++v) {
    int n = topo.neighbors(v, buf);
    for (int k = 0; k < n; ++k) list.targets[list.offsets[v] + k] = buf[k];
  }
  return list;
}

}  // namespace mssz
