#pragma once

// Derives the sparse, strictly decreasing value edits that make the
// decompressed field's Morse-Smale segmentation equal the original's while
// staying inside the global error bound.
//
// Structure: an outer loop alternates the critical-point loop (four subloops
// fixing FPmax, FPmin, FNmax, FNmin, each iterated to emptiness) with the
// regular-point loop (troublemaker search along the original field's integral
// lines).  Every edit halves a value toward its floor f_i - xi, so values only
// ever decrease; termination follows from the floors being ordered like the
// original field, with the float-floor clamp plus SoS index tie-breaking
// standing in for exact arithmetic.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mssz/exec.hpp"
#include "mssz/grid.hpp"
#include "mssz/mss.hpp"

namespace mssz {

// False extrema of the edited field relative to the original, each vertex
// reported under the first matching class (construction order FPmax, FPmin,
// FNmax, FNmin keeps the lists disjoint).
struct FalseCriticalReport {
  std::vector<VertexId> fp_max;
  std::vector<VertexId> fp_min;
  std::vector<VertexId> fn_max;
  std::vector<VertexId> fn_min;

  bool empty() const {
    return fp_max.empty() && fp_min.empty() && fn_max.empty() && fn_min.empty();
  }
  std::uint64_t total() const {
    return fp_max.size() + fp_min.size() + fn_max.size() + fn_min.size();
  }
};

// Sparse vertex -> edited-value map; indices strictly increasing.  Values are
// stored absolutely (the full edited scalar) so reconstruction is bit-exact.
template <class T>
struct EditSet {
  std::vector<VertexId> indices;
  std::vector<T> values;

  std::uint64_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

struct EditStats {
  std::uint64_t outer_iterations = 0;
  std::uint64_t c_passes = 0;
  std::uint64_t sub_iterations[4] = {0, 0, 0, 0};  // FPmax, FPmin, FNmax, FNmin
  std::uint64_t r_iterations = 0;
  std::uint64_t effective_edits = 0;  // lower_step calls that moved a value
  std::uint64_t touched = 0;
  std::uint64_t input_bound_violations = 0;  // nonzero only under force
  double direction_seconds = 0.0;
  double label_seconds = 0.0;

  std::uint64_t sub_iterations_total() const {
    return sub_iterations[0] + sub_iterations[1] + sub_iterations[2] + sub_iterations[3];
  }
};

template <class T>
struct DeriveOptions {
  ExecPolicy policy{};
  std::uint64_t outer_cap = 1000;
  std::uint64_t subloop_cap = 640;  // one halving per vertex per iteration
  std::uint64_t r_cap = 100000;
  // Accept inputs with |f - fhat| > xi (external data); the bound guarantee
  // is void at the violating vertices but edits still never move below f-xi.
  bool force = false;
  // Test instrumentation: called with the full edited array after every batch
  // of edits (monotonicity snapshots).
  std::function<void(std::span<const T>)> on_batch;
};

template <class T>
class EditState {
 public:
  EditState(const GridTopology& topo, const T* original, const T* decompressed, double xi,
            const ExecPolicy& policy);

  EditState(const EditState&) = delete;
  EditState& operator=(const EditState&) = delete;

  // One halving of g_t toward f_t - xi, clamped at the representable floor.
  // Returns false when t is already at its floor (no decrease possible).
  bool lower_step(VertexId t);

  // Recomputes the edited field's direction field if edits invalidated it.
  void refresh_directions();

  const FalseCriticalReport& detect_false_critical();

  std::uint64_t fix_fp_max(const FalseCriticalReport& report);
  std::uint64_t fix_fp_min(const FalseCriticalReport& report);
  std::uint64_t fix_fn_max(const FalseCriticalReport& report);
  std::uint64_t fix_fn_min(const FalseCriticalReport& report);

  void run_c_loop(const DeriveOptions<T>& opts, EditStats& stats);

  // Returns the number of iterations run; exits early (without error) when an
  // edit batch introduced new false critical points, handing control back to
  // the C-loop.
  std::uint64_t run_r_loop(const DeriveOptions<T>& opts, EditStats& stats);

  enum class LineKind { ascending, descending };

  // Walks the original field's integral line from v and returns (v_i, v_t):
  // the first vertex whose steepest neighbor diverges between f and g, and
  // the vertex to lower (g's ascending neighbor of v_i for ascending lines,
  // f's descending neighbor of v_i for descending lines).
  std::pair<VertexId, VertexId> find_troublemaker(VertexId v, LineKind kind) const;

  EditSet<T> edits() const;

  const GridTopology& topology() const { return *topo_; }
  double xi() const { return xi_; }
  std::span<const T> edited() const { return std::span<const T>(g_); }
  std::span<const T> floors() const { return std::span<const T>(floors_); }
  const DirectionField& original_directions() const { return f_dirs_; }
  const DirectionField& edited_directions() const { return g_dirs_; }
  const SegmentationLabels& original_labels() const { return f_labels_; }

  void collect_phase_times(EditStats& stats);

 private:
  enum class FixTarget { self, ascending_neighbor_of_g, descending_neighbor_of_f };

  bool claim(VertexId v);
  std::uint64_t fix_list(std::span<const VertexId> list, FixTarget rule);
  std::uint64_t run_subloop(int kind, const DeriveOptions<T>& opts, EditStats& stats);
  std::span<const VertexId> detect_kind(int kind);
  VertexId g_argmax_neighbor(VertexId v) const;
  VertexId f_argmin_neighbor(VertexId v) const;
  T g_load(VertexId v) const;
  void g_store(VertexId v, T value);

  const GridTopology* topo_;
  const T* original_;
  double xi_;
  ExecPolicy policy_;

  std::vector<T> g_;
  std::vector<T> floors_;
  std::vector<std::uint8_t> touched_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t batch_ = 0;
  bool atomic_phase_ = false;
  bool directions_current_ = false;

  DirectionField f_dirs_;
  DirectionField g_dirs_;
  SegmentationLabels f_labels_;
  SegmentationLabels g_labels_;
  std::vector<VertexId> label_scratch_;
  FalseCriticalReport report_;
  std::vector<VertexId> kind_buf_;  // paper-style length-N detection buffer

  double direction_seconds_ = 0.0;
  double label_seconds_ = 0.0;

  void compute_g_labels();
  std::uint64_t collect_mismatched(std::vector<VertexId>& out) const;

  friend struct EditEngineTestAccess;

  template <class U>
  friend EditSet<U> derive_edits(const GridTopology&, const U*, const U*, double,
                                 const DeriveOptions<U>&, EditStats*);
};

// Full pipeline: validates the input bound, alternates C- and R-loops until a
// complete outer pass makes zero edits, verifies the postconditions, and
// returns the touched vertices.  Raises non_convergence when a cap trips.
template <class T>
EditSet<T> derive_edits(const GridTopology& topo, const T* original, const T* decompressed,
                        double xi, const DeriveOptions<T>& opts = {},
                        EditStats* stats_out = nullptr);

template <class T>
std::vector<T> apply_edits(const GridTopology& topo, const T* decompressed,
                           const EditSet<T>& edits);

}  // namespace mssz
