#include "mssz/mss.hpp"

#include <atomic>
#include <bit>
#include <fstream>

#include "mssz/wire.hpp"

namespace mssz {

template <class T>
void compute_directions(const GridTopology& topo, const T* values, const ExecPolicy& policy,
                        DirectionField& out) {
  out.asc.resize(topo.vertex_count);
  out.desc.resize(topo.vertex_count);
  VertexId* asc = out.asc.data();
  VertexId* desc = out.desc.data();
  parallel_for(topo.vertex_count, policy, [&](VertexId v) {
    VertexId nbr[GridTopology::kMaxNeighbors];
    const int n = topo.neighbors(v, nbr);
    VertexId hi = v, lo = v;
    for (int k = 0; k < n; ++k) {
      const VertexId j = nbr[k];
      if (sos_greater(values, j, hi)) hi = j;
      if (sos_less(values, j, lo)) lo = j;
    }
    asc[v] = hi;
    desc[v] = lo;
  });
}

template <class T>
DirectionField compute_directions(const GridTopology& topo, const T* values,
                                  const ExecPolicy& policy) {
  DirectionField out;
  compute_directions(topo, values, policy, out);
  return out;
}

CriticalSet classify_critical(const DirectionField& directions) {
  CriticalSet cs;
  for (VertexId v = 0; v < directions.asc.size(); ++v) {
    if (directions.is_max(v)) cs.maxima.push_back(v);
    if (directions.is_min(v)) cs.minima.push_back(v);
  }
  return cs;
}

namespace {

int jump_round_cap(std::uint64_t n) {
  // ceil(log2 n) + 2; doubling needs ceil(log2 chain) rounds plus one to
  // observe the fixpoint, so exceeding this means a corrupt direction field.
  return static_cast<int>(std::bit_width(n - 1)) + 2;
}

// One label family (ascending toward maxima, or descending toward minima).
// Round-synchronous doubling: next[i] = cur[cur[i]] reads only the previous
// round, so the parallel result is bit-identical to the serial one.
void jump_to_fixpoint(const GridTopology& topo, const std::vector<VertexId>& parent,
                      const ExecPolicy& policy, std::vector<VertexId>& cur,
                      std::vector<VertexId>& next) {
  const std::uint64_t n = topo.vertex_count;
  cur = parent;
  next.resize(n);
  for (int round = 0; round < jump_round_cap(n); ++round) {
    std::atomic<bool> changed{false};
    const VertexId* src = cur.data();
    VertexId* dst = next.data();
    parallel_for(n, policy, [&](VertexId i) {
      const VertexId hop = src[src[i]];
      dst[i] = hop;
      if (hop != src[i] && !changed.load(std::memory_order_relaxed))
        changed.store(true, std::memory_order_relaxed);
    });
    cur.swap(next);
    if (!changed.load(std::memory_order_relaxed)) return;
  }
  raise(ErrKind::internal, "path compression exceeded its round cap (corrupt direction field)");
}

}  // namespace

void compute_labels_into(const GridTopology& topo, const DirectionField& directions,
                         const ExecPolicy& policy, SegmentationLabels& out,
                         std::vector<VertexId>& scratch) {
  jump_to_fixpoint(topo, directions.asc, policy, out.max_label, scratch);
  jump_to_fixpoint(topo, directions.desc, policy, out.min_label, scratch);
}

SegmentationLabels compute_labels(const GridTopology& topo, const DirectionField& directions,
                                  const ExecPolicy& policy) {
  SegmentationLabels labels;
  std::vector<VertexId> scratch;
  compute_labels_into(topo, directions, policy, labels, scratch);
  return labels;
}

template <class T>
SegmentationLabels oracle_labels(const GridTopology& topo, const T* values) {
  DirectionField dirs = compute_directions(topo, values, ExecPolicy::serial_policy());
  SegmentationLabels labels;
  labels.max_label.resize(topo.vertex_count);
  labels.min_label.resize(topo.vertex_count);
  auto walk = [&](const std::vector<VertexId>& parent, VertexId start) {
    VertexId cur = start;
    std::uint64_t steps = 0;
    while (parent[cur] != cur) {
      cur = parent[cur];
      if (++steps > topo.vertex_count)
        raise(ErrKind::internal, "integral line cycle (SoS order violated)");
    }
    return cur;
  };
  for (VertexId v = 0; v < topo.vertex_count; ++v) {
    labels.max_label[v] = walk(dirs.asc, v);
    labels.min_label[v] = walk(dirs.desc, v);
  }
  return labels;
}

LabelComparison segmentation_equal(const SegmentationLabels& a, const SegmentationLabels& b) {
  if (a.max_label.size() != b.max_label.size())
    raise(ErrKind::usage, "segmentation_equal: topology mismatch");
  LabelComparison cmp;
  cmp.match.resize(a.max_label.size());
  for (std::size_t i = 0; i < a.max_label.size(); ++i) {
    const bool ok = a.max_label[i] == b.max_label[i] && a.min_label[i] == b.min_label[i];
    cmp.match[i] = ok ? 1 : 0;
    if (!ok) ++cmp.mismatches;
  }
  return cmp;
}

void export_labels(const SegmentationLabels& labels, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve((labels.max_label.size() + labels.min_label.size()) * 8);
  for (VertexId v : labels.max_label) wire::put_u64(bytes, v);
  for (VertexId v : labels.min_label) wire::put_u64(bytes, v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrKind::io, "write failed on '" + path.string() + "'");
}

template void compute_directions<float>(const GridTopology&, const float*, const ExecPolicy&,
                                        DirectionField&);
template void compute_directions<double>(const GridTopology&, const double*, const ExecPolicy&,
                                         DirectionField&);
template DirectionField compute_directions<float>(const GridTopology&, const float*,
                                                  const ExecPolicy&);
template DirectionField compute_directions<double>(const GridTopology&, const double*,
                                                   const ExecPolicy&);
template SegmentationLabels oracle_labels<float>(const GridTopology&, const float*);
template SegmentationLabels oracle_labels<double>(const GridTopology&, const double*);

}  // namespace mssz
