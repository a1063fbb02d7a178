#pragma once

// Morse-Smale segmentation of a PL scalar field on the grid triangulation:
// per-vertex steepest ascending/descending neighbors, extrema, and the
// (min-label, max-label) pair reached by each vertex's integral lines.
//
// Saddles are deliberately not classified; the segmentation only needs the
// extremum labels, and a vertex is an extremum iff it beats (or loses to)
// every link vertex under SoS.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mssz/exec.hpp"
#include "mssz/field.hpp"
#include "mssz/grid.hpp"

namespace mssz {

// asc[i] is the SoS-steepest neighbor above i, or i itself when i is a
// maximum; desc[i] dually.  Encoding SELF as the own index makes the label
// arrays start out as valid chain parents.
struct DirectionField {
  std::vector<VertexId> asc;
  std::vector<VertexId> desc;

  bool is_max(VertexId v) const { return asc[v] == v; }
  bool is_min(VertexId v) const { return desc[v] == v; }
};

struct CriticalSet {
  std::vector<VertexId> maxima;  // sorted
  std::vector<VertexId> minima;  // sorted
};

struct SegmentationLabels {
  std::vector<VertexId> max_label;  // M: maximum reached ascending
  std::vector<VertexId> min_label;  // m: minimum reached descending

  bool operator==(const SegmentationLabels&) const = default;
};

template <class T>
void compute_directions(const GridTopology& topo, const T* values, const ExecPolicy& policy,
                        DirectionField& out);

template <class T>
DirectionField compute_directions(const GridTopology& topo, const T* values,
                                  const ExecPolicy& policy = {});

CriticalSet classify_critical(const DirectionField& directions);

// Pointer-jumping fixpoint over the direction chains (round-synchronous, so
// labels are identical for every thread count).  Raises internal if the
// fixpoint is not reached within ceil(log2 N) + 2 rounds, which cannot happen
// unless the direction field is corrupt.
SegmentationLabels compute_labels(const GridTopology& topo, const DirectionField& directions,
                                  const ExecPolicy& policy = {});

void compute_labels_into(const GridTopology& topo, const DirectionField& directions,
                         const ExecPolicy& policy, SegmentationLabels& out,
                         std::vector<VertexId>& scratch);

// Test-only reference: literally walks each chain to its endpoint.
template <class T>
SegmentationLabels oracle_labels(const GridTopology& topo, const T* values);

struct LabelComparison {
  std::vector<std::uint8_t> match;  // per-vertex: both labels equal
  std::uint64_t mismatches = 0;
};

LabelComparison segmentation_equal(const SegmentationLabels& a, const SegmentationLabels& b);

// mss-export: M array then m array, raw u64 little-endian, field ordering.
void export_labels(const SegmentationLabels& labels, const std::filesystem::path& path);

}  // namespace mssz
