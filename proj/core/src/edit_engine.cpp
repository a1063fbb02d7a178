#include "mssz/edit_engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>

namespace mssz {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Smallest representable value strictly above f - xi (evaluated in double).
// Everything at or above this satisfies |f - g| <= xi under the double-
// precision verification comparison.
template <class T>
T representable_floor(T f, double xi) {
  const double lo = static_cast<double>(f) - xi;
  T c = static_cast<T>(lo);
  if (!(static_cast<double>(c) > lo))
    c = std::nextafter(c, std::numeric_limits<T>::infinity());
  return c;
}

constexpr int kFpMax = 0, kFpMin = 1, kFnMax = 2, kFnMin = 3;
const char* kKindName[4] = {"FPmax", "FPmin", "FNmax", "FNmin"};

}  // namespace

template <class T>
EditState<T>::EditState(const GridTopology& topo, const T* original, const T* decompressed,
                        double xi, const ExecPolicy& policy)
    : topo_(&topo), original_(original), xi_(xi), policy_(policy) {
  const std::uint64_t n = topo.vertex_count;
  g_.assign(decompressed, decompressed + n);
  floors_.resize(n);
  parallel_for(n, policy_, [&](VertexId v) { floors_[v] = representable_floor(original[v], xi); });
  touched_.assign(n, 0);
  stamp_.assign(n, 0);
  kind_buf_.resize(n);

  auto t0 = Clock::now();
  compute_directions(topo, original, policy_, f_dirs_);
  direction_seconds_ += seconds_since(t0);
  t0 = Clock::now();
  compute_labels_into(topo, f_dirs_, policy_, f_labels_, label_scratch_);
  label_seconds_ += seconds_since(t0);

  refresh_directions();
}

template <class T>
T EditState<T>::g_load(VertexId v) const {
  if (atomic_phase_) {
    // the vector storage itself is mutable; atomic_ref<const T> is C++26
    return std::atomic_ref<T>(const_cast<T&>(g_[v])).load(std::memory_order_relaxed);
  }
  return g_[v];
}

template <class T>
void EditState<T>::g_store(VertexId v, T value) {
  if (atomic_phase_)
    std::atomic_ref<T>(g_[v]).store(value, std::memory_order_relaxed);
  else
    g_[v] = value;
}

template <class T>
bool EditState<T>::lower_step(VertexId t) {
  const T g = g_load(t);
  const T lo = floors_[t];
  if (!(g > lo)) return false;  // at (or, under force, below) the floor
  const double target = static_cast<double>(original_[t]) - xi_;
  T mid = static_cast<T>(0.5 * (static_cast<double>(g) + target));
  if (!(mid < g) || mid < lo) mid = lo;  // halving stalled within 1 ulp, or overshot
  g_store(t, mid);
  touched_[t] = 1;
  return true;
}

template <class T>
void EditState<T>::refresh_directions() {
  if (directions_current_) return;
  const auto t0 = Clock::now();
  compute_directions(*topo_, g_.data(), policy_, g_dirs_);
  direction_seconds_ += seconds_since(t0);
  directions_current_ = true;
}

template <class T>
void EditState<T>::compute_g_labels() {
  const auto t0 = Clock::now();
  compute_labels_into(*topo_, g_dirs_, policy_, g_labels_, label_scratch_);
  label_seconds_ += seconds_since(t0);
}

template <class T>
std::span<const VertexId> EditState<T>::detect_kind(int kind) {
  const std::uint64_t n = topo_->vertex_count;
  const VertexId* af = f_dirs_.asc.data();
  const VertexId* df = f_dirs_.desc.data();
  const VertexId* ag = g_dirs_.asc.data();
  const VertexId* dg = g_dirs_.desc.data();
  auto matches = [&](VertexId v) {
    switch (kind) {
      case kFpMax: return ag[v] == v && af[v] != v;
      case kFpMin: return dg[v] == v && df[v] != v;
      case kFnMax: return af[v] == v && ag[v] != v;
      default:     return df[v] == v && dg[v] != v;
    }
  };
  if (policy_.is_serial()) {
    std::uint64_t count = 0;
    for (VertexId v = 0; v < n; ++v)
      if (matches(v)) kind_buf_[count++] = v;
    return std::span<const VertexId>(kind_buf_.data(), count);
  }
  std::atomic<std::uint64_t> count{0};
  parallel_for(n, policy_, [&](VertexId v) {
    if (matches(v)) kind_buf_[count.fetch_add(1, std::memory_order_relaxed)] = v;
  });
  const std::uint64_t c = count.load();
  std::sort(kind_buf_.begin(), kind_buf_.begin() + static_cast<std::ptrdiff_t>(c));
  return std::span<const VertexId>(kind_buf_.data(), c);
}

template <class T>
const FalseCriticalReport& EditState<T>::detect_false_critical() {
  refresh_directions();
  const std::uint64_t n = topo_->vertex_count;
  const VertexId* af = f_dirs_.asc.data();
  const VertexId* df = f_dirs_.desc.data();
  const VertexId* ag = g_dirs_.asc.data();
  const VertexId* dg = g_dirs_.desc.data();
  report_.fp_max.clear();
  report_.fp_min.clear();
  report_.fn_max.clear();
  report_.fn_min.clear();
  // first matching class wins so the lists stay disjoint
  for (VertexId v = 0; v < n; ++v) {
    if (ag[v] == v && af[v] != v)
      report_.fp_max.push_back(v);
    else if (dg[v] == v && df[v] != v)
      report_.fp_min.push_back(v);
    else if (af[v] == v && ag[v] != v)
      report_.fn_max.push_back(v);
    else if (df[v] == v && dg[v] != v)
      report_.fn_min.push_back(v);
  }
  return report_;
}

template <class T>
bool EditState<T>::claim(VertexId v) {
  if (atomic_phase_) {
    std::atomic_ref<std::uint32_t> ref(stamp_[v]);
    return ref.exchange(batch_, std::memory_order_relaxed) != batch_;
  }
  if (stamp_[v] == batch_) return false;
  stamp_[v] = batch_;
  return true;
}

template <class T>
VertexId EditState<T>::g_argmax_neighbor(VertexId v) const {
  VertexId nbr[GridTopology::kMaxNeighbors];
  const int n = topo_->neighbors(v, nbr);
  VertexId best = nbr[0];
  T best_val = g_load(best);
  for (int k = 1; k < n; ++k) {
    const T val = g_load(nbr[k]);
    if (val > best_val || (val == best_val && nbr[k] > best)) {
      best = nbr[k];
      best_val = val;
    }
  }
  return best;
}

template <class T>
VertexId EditState<T>::f_argmin_neighbor(VertexId v) const {
  VertexId nbr[GridTopology::kMaxNeighbors];
  const int n = topo_->neighbors(v, nbr);
  VertexId best = nbr[0];
  for (int k = 1; k < n; ++k)
    if (sos_less(original_, nbr[k], best)) best = nbr[k];
  return best;
}

template <class T>
std::uint64_t EditState<T>::fix_list(std::span<const VertexId> list, FixTarget rule) {
  ++batch_;
  auto target_of = [&](VertexId v) {
    switch (rule) {
      case FixTarget::self: return v;
      case FixTarget::ascending_neighbor_of_g: return g_argmax_neighbor(v);
      default: return f_argmin_neighbor(v);
    }
  };
  std::uint64_t applied = 0;
  if (policy_.is_serial()) {
    for (VertexId v : list) {
      const VertexId t = target_of(v);
      if (claim(t) && lower_step(t)) ++applied;
    }
  } else {
    // parallel-over-critical-points: first claimant wins, losers are deferred
    // to re-detection in the next iteration
    std::atomic<std::uint64_t> count{0};
    atomic_phase_ = true;
    parallel_for(list.size(), policy_, [&](std::uint64_t i) {
      const VertexId t = target_of(list[i]);
      if (claim(t) && lower_step(t)) count.fetch_add(1, std::memory_order_relaxed);
    });
    atomic_phase_ = false;
    applied = count.load();
  }
  if (applied != 0) directions_current_ = false;
  return applied;
}

template <class T>
std::uint64_t EditState<T>::fix_fp_max(const FalseCriticalReport& report) {
  return fix_list(report.fp_max, FixTarget::self);
}
template <class T>
std::uint64_t EditState<T>::fix_fp_min(const FalseCriticalReport& report) {
  return fix_list(report.fp_min, FixTarget::ascending_neighbor_of_g);
}
template <class T>
std::uint64_t EditState<T>::fix_fn_max(const FalseCriticalReport& report) {
  return fix_list(report.fn_max, FixTarget::ascending_neighbor_of_g);
}
template <class T>
std::uint64_t EditState<T>::fix_fn_min(const FalseCriticalReport& report) {
  return fix_list(report.fn_min, FixTarget::self);
}

template <class T>
std::uint64_t EditState<T>::run_subloop(int kind, const DeriveOptions<T>& opts,
                                        EditStats& stats) {
  const FixTarget rule = (kind == kFpMax || kind == kFnMin)
                             ? FixTarget::self
                             : FixTarget::ascending_neighbor_of_g;
  std::uint64_t edits_total = 0;
  std::uint64_t iters = 0;
  for (;;) {
    refresh_directions();
    auto list = detect_kind(kind);
    if (list.empty()) break;
    if (++iters > opts.subloop_cap)
      raise(ErrKind::non_convergence,
            std::string(kKindName[kind]) + " subloop exceeded its iteration cap");
    std::uint64_t applied = fix_list(list, rule);
    if (applied == 0 && kind == kFpMin) {
      // The ascending-neighbor rule can park every current target at its
      // floor while a *different* neighbor still holds the false minimum in
      // place.  The neighbor lowest in the original field always has a floor
      // strictly under g_i, so lowering it is guaranteed to make progress.
      applied = fix_list(list, FixTarget::descending_neighbor_of_f);
    }
    if (applied == 0)
      raise(ErrKind::non_convergence,
            std::string(kKindName[kind]) + " subloop stalled at the float floor");
    edits_total += applied;
    ++stats.sub_iterations[kind];
    if (opts.on_batch) opts.on_batch(std::span<const T>(g_));
  }
  stats.effective_edits += edits_total;
  return edits_total;
}

template <class T>
void EditState<T>::run_c_loop(const DeriveOptions<T>& opts, EditStats& stats) {
  // FPmax -> FPmin -> FNmax -> FNmin, each to emptiness; repeat until a full
  // pass makes no edits (then no false critical point of any kind remains)
  for (;;) {
    ++stats.c_passes;
    std::uint64_t pass_edits = 0;
    for (int kind = kFpMax; kind <= kFnMin; ++kind)
      pass_edits += run_subloop(kind, opts, stats);
    if (pass_edits == 0) return;
  }
}

template <class T>
std::pair<VertexId, VertexId> EditState<T>::find_troublemaker(VertexId v, LineKind kind) const {
  const bool asc = kind == LineKind::ascending;
  const std::vector<VertexId>& f_dir = asc ? f_dirs_.asc : f_dirs_.desc;
  const std::vector<VertexId>& g_dir = asc ? g_dirs_.asc : g_dirs_.desc;
  VertexId cur = v;
  std::uint64_t steps = 0;
  for (;;) {
    if (g_dir[cur] != f_dir[cur]) {
      // ascending: g's ascending neighbor draws the line away, lower it;
      // descending: f's descending neighbor must win again, lower it
      const VertexId vt = asc ? g_dir[cur] : f_dir[cur];
      if (vt == cur)
        raise(ErrKind::internal, "troublemaker target is an extremum (stale critical report)");
      return {cur, vt};
    }
    if (f_dir[cur] == cur) break;  // reached the extremum without divergence
    cur = f_dir[cur];
    if (++steps > topo_->vertex_count)
      raise(ErrKind::internal, "integral line cycle during troublemaker search");
  }
  raise(ErrKind::internal, "no divergence along a falsely labeled vertex's integral line");
}

template <class T>
std::uint64_t EditState<T>::collect_mismatched(std::vector<VertexId>& out) const {
  out.clear();
  const std::uint64_t n = topo_->vertex_count;
  for (VertexId v = 0; v < n; ++v) {
    if (g_labels_.max_label[v] != f_labels_.max_label[v] ||
        g_labels_.min_label[v] != f_labels_.min_label[v])
      out.push_back(v);
  }
  return out.size();
}

template <class T>
std::uint64_t EditState<T>::run_r_loop(const DeriveOptions<T>& opts, EditStats& stats) {
  std::uint64_t iters = 0;
  std::vector<VertexId> mismatched;
  std::vector<VertexId> targets;
  for (;;) {
    refresh_directions();
    // fixing regular points may have minted new false critical points; those
    // must be cleared before troublemaker walks make sense again
    if (!detect_false_critical().empty()) return iters;
    compute_g_labels();
    if (collect_mismatched(mismatched) == 0) return iters;
    if (++iters > opts.r_cap)
      raise(ErrKind::non_convergence, "R-loop exceeded its iteration cap");

    ++batch_;
    targets.clear();
    for (VertexId v : mismatched) {
      if (g_labels_.max_label[v] != f_labels_.max_label[v]) {
        auto [vi, vt] = find_troublemaker(v, LineKind::ascending);
        if (claim(vt)) targets.push_back(vt);
      }
      if (g_labels_.min_label[v] != f_labels_.min_label[v]) {
        auto [vi, vt] = find_troublemaker(v, LineKind::descending);
        if (claim(vt)) targets.push_back(vt);
      }
    }
    std::uint64_t applied = 0;
    for (VertexId t : targets)
      if (lower_step(t)) ++applied;
    if (applied == 0)
      raise(ErrKind::non_convergence, "R-loop stalled: every troublemaker is at its floor");
    directions_current_ = false;
    stats.effective_edits += applied;
    ++stats.r_iterations;
    if (opts.on_batch) opts.on_batch(std::span<const T>(g_));
  }
}

template <class T>
EditSet<T> EditState<T>::edits() const {
  EditSet<T> set;
  for (VertexId v = 0; v < topo_->vertex_count; ++v) {
    if (touched_[v]) {
      set.indices.push_back(v);
      set.values.push_back(g_[v]);
    }
  }
  return set;
}

template <class T>
void EditState<T>::collect_phase_times(EditStats& stats) {
  stats.direction_seconds = direction_seconds_;
  stats.label_seconds = label_seconds_;
}

template <class T>
EditSet<T> derive_edits(const GridTopology& topo, const T* original, const T* decompressed,
                        double xi, const DeriveOptions<T>& opts, EditStats* stats_out) {
  if (!(xi > 0.0)) raise(ErrKind::usage, "derive_edits requires xi > 0");
  std::uint64_t violations = 0;
  for (VertexId v = 0; v < topo.vertex_count; ++v) {
    const double f = static_cast<double>(original[v]);
    const double fh = static_cast<double>(decompressed[v]);
    if (!std::isfinite(f) || !std::isfinite(fh))
      raise(ErrKind::io, "derive_edits: non-finite input");
    if (std::abs(f - fh) > xi) ++violations;
  }
  if (violations != 0 && !opts.force)
    raise(ErrKind::bound_violation,
          std::to_string(violations) +
              " vertices violate |f - fhat| <= xi; the preservation guarantee "
              "would not hold (pass force to proceed anyway)");

  EditState<T> state(topo, original, decompressed, xi, opts.policy);
  EditStats stats;
  stats.input_bound_violations = violations;

  for (std::uint64_t outer = 0;; ++outer) {
    if (outer >= opts.outer_cap)
      raise(ErrKind::non_convergence,
            "outer loop cap reached after " + std::to_string(stats.effective_edits) +
                " edits (" + std::to_string(stats.sub_iterations_total()) + " C sub-iterations, " +
                std::to_string(stats.r_iterations) + " R iterations)");
    ++stats.outer_iterations;
    const std::uint64_t before = stats.effective_edits;
    state.run_c_loop(opts, stats);
    state.run_r_loop(opts, stats);
    if (stats.effective_edits == before) break;
  }

  // postcondition tripwire: a zero-edit pass implies all three preservation
  // constraints, anything else is an internal bug
  state.refresh_directions();
  if (!state.detect_false_critical().empty())
    raise(ErrKind::internal, "converged with false critical points");
  state.compute_g_labels();
  if (state.collect_mismatched(state.label_scratch_) != 0)
    raise(ErrKind::internal, "converged with mismatched labels");

  EditSet<T> set = state.edits();
  stats.touched = set.size();
  state.collect_phase_times(stats);
  if (stats_out) *stats_out = stats;
  return set;
}

template <class T>
std::vector<T> apply_edits(const GridTopology& topo, const T* decompressed,
                           const EditSet<T>& edits) {
  std::vector<T> out(decompressed, decompressed + topo.vertex_count);
  if (edits.indices.size() != edits.values.size())
    raise(ErrKind::corrupt_archive, "edit set index/value length mismatch");
  for (std::size_t k = 0; k < edits.indices.size(); ++k) {
    const VertexId v = edits.indices[k];
    if (v >= topo.vertex_count)
      raise(ErrKind::corrupt_archive, "edit index out of range");
    out[v] = edits.values[k];
  }
  return out;
}

template class EditState<float>;
template class EditState<double>;
template EditSet<float> derive_edits<float>(const GridTopology&, const float*, const float*,
                                            double, const DeriveOptions<float>&, EditStats*);
template EditSet<double> derive_edits<double>(const GridTopology&, const double*, const double*,
                                              double, const DeriveOptions<double>&, EditStats*);
template std::vector<float> apply_edits<float>(const GridTopology&, const float*,
                                               const EditSet<float>&);
template std::vector<double> apply_edits<double>(const GridTopology&, const double*,
                                                 const EditSet<double>&);

}  // namespace mssz
