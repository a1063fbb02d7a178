// Acceptance suite: one line of output per criterion, nonzero exit on any
// failure.  Heavier, end-to-end counterpart of the unit tests; the CLI binary
// path arrives via MSSZ_BIN_PATH.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mssz/base_codec.hpp"
#include "mssz/edit_codec.hpp"
#include "mssz/edit_engine.hpp"
#include "mssz/field.hpp"
#include "mssz/metrics.hpp"
#include "mssz/mss.hpp"

using namespace mssz;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << "criterion " << id << " [" << (pass ? "PASS" : "FAIL") << "] " << name << ": "
            << detail << std::endl;
  if (!pass) ++failures;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mssz_accept_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MSSZ_BIN_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const ExecPolicy kSerial = ExecPolicy::serial_policy();

constexpr std::uint64_t kSeeds = 20;
const SyntheticKind kKinds[] = {SyntheticKind::gaussian_mixture, SyntheticKind::trig,
                                SyntheticKind::random_smooth};
const char* kKindNames[] = {"gaussian-mixture", "trig", "random-smooth"};
const double kRelBounds[] = {1e-3, 1e-2};

std::vector<std::uint64_t> suite_dims(int which) {
  return which == 0 ? std::vector<std::uint64_t>{64, 64}
                    : std::vector<std::uint64_t>{32, 32, 32};
}

std::string dims_str(const std::vector<std::uint64_t>& dims) {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  return os.str();
}

// postconditions checked from scratch: exact label equality, identical
// extrema, zero bound violations
struct PostconditionCheck {
  bool distortion_zero;
  bool extrema_equal;
  std::uint64_t bound_violations;
  bool ok() const { return distortion_zero && extrema_equal && bound_violations == 0; }
};

PostconditionCheck check_postconditions(const Field<double>& f, const std::vector<double>& g,
                                        double xi) {
  PostconditionCheck pc{};
  auto df = compute_directions(f.topo, f.data(), kSerial);
  auto dg = compute_directions(f.topo, g.data(), kSerial);
  auto cf = classify_critical(df);
  auto cg = classify_critical(dg);
  pc.extrema_equal = cf.maxima == cg.maxima && cf.minima == cg.minima;
  auto lf = compute_labels(f.topo, df, kSerial);
  auto lg = compute_labels(f.topo, dg, kSerial);
  pc.distortion_zero = segmentation_equal(lf, lg).mismatches == 0;
  for (VertexId v = 0; v < f.size(); ++v)
    if (std::abs(f.values[v] - g[v]) > xi) ++pc.bound_violations;
  return pc;
}

// one in-process record per (kind, dims, eb, seed) suite combination
struct SuiteRun {
  int kind;
  int dims_which;
  double eb;
  std::uint64_t seed;
  double xi;
  double base_distortion;   // without edits
  double edit_ratio;
  bool serial_ok;
  bool monotone_ok;
  bool parallel_ok[3];  // threads 2, 4, 8
};

std::vector<SuiteRun> run_suite() {
  std::vector<SuiteRun> runs;
  for (int kind = 0; kind < 3; ++kind) {
    for (int dw = 0; dw < 2; ++dw) {
      const auto dims = suite_dims(dw);
      for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        auto f = generate_synthetic<double>(kKinds[kind], dims, seed);
        auto lf = compute_labels(f.topo, compute_directions(f.topo, f.data(), kSerial), kSerial);
        for (double eb : kRelBounds) {
          SuiteRun run{};
          run.kind = kind;
          run.dims_which = dw;
          run.eb = eb;
          run.seed = seed;
          run.xi = resolve_bound(ErrorBound{ErrorBound::Mode::relative, eb}, f);

          auto base = compress_base(f.topo, f.data(), run.xi);
          auto lbase = compute_labels(
              f.topo, compute_directions(f.topo, base.reconstruction.data(), kSerial), kSerial);
          run.base_distortion = mss_distortion(lf, lbase);

          // serial reference with monotonicity instrumentation
          std::vector<double> prev = base.reconstruction;
          bool monotone = true;
          DeriveOptions<double> opts;
          opts.policy = kSerial;
          opts.on_batch = [&](std::span<const double> g) {
            for (std::size_t i = 0; i < g.size(); ++i) {
              if (g[i] > prev[i]) monotone = false;
              prev[i] = g[i];
            }
          };
          auto edits = derive_edits(f.topo, f.data(), base.reconstruction.data(), run.xi, opts);
          run.monotone_ok = monotone;
          run.edit_ratio = edit_ratio(edits.size(), f.size());
          auto g = apply_edits(f.topo, base.reconstruction.data(), edits);
          run.serial_ok = check_postconditions(f, g, run.xi).ok();

          const int thread_counts[3] = {2, 4, 8};
          for (int t = 0; t < 3; ++t) {
            DeriveOptions<double> popts;
            popts.policy = ExecPolicy{thread_counts[t], false};
            auto pedits =
                derive_edits(f.topo, f.data(), base.reconstruction.data(), run.xi, popts);
            auto pg = apply_edits(f.topo, base.reconstruction.data(), pedits);
            run.parallel_ok[t] = check_postconditions(f, pg, run.xi).ok();
          }
          runs.push_back(run);
        }
      }
    }
  }
  return runs;
}

void criterion_1_exact_preservation(TempDir& tmp) {
  int total = 0, ok = 0;
  double slowest = 0.0;
  std::string first_fail;
  for (int kind = 0; kind < 3; ++kind) {
    for (int dw = 0; dw < 2; ++dw) {
      const auto dims = suite_dims(dw);
      const std::string ds = dims_str(dims);
      for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        auto f = generate_synthetic<double>(kKinds[kind], dims, seed);
        const auto in = tmp.file("c1_f.raw");
        const auto arch = tmp.file("c1_a.mssz");
        const auto out = tmp.file("c1_g.raw");
        store_raw(f, in);
        for (double eb : kRelBounds) {
          ++total;
          std::ostringstream cmd;
          cmd << "compress --input " << in << " --dims " << ds << " --dtype f64 --eb " << eb
              << " --eb-mode rel --serial --output " << arch;
          const auto t0 = Clock::now();
          int rc = run_cli(cmd.str());
          const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
          slowest = std::max(slowest, secs);
          if (rc != 0 || secs >= 60.0) {
            if (first_fail.empty())
              first_fail = kKindNames[kind] + std::string(" ") + ds + " seed " +
                           std::to_string(seed) + " rc=" + std::to_string(rc) + " t=" +
                           std::to_string(secs);
            continue;
          }
          if (run_cli("decompress --input " + arch + " --output " + out) != 0) {
            if (first_fail.empty()) first_fail = "decompress failed";
            continue;
          }
          auto g = load_raw<double>(out, dims);
          const double xi = resolve_bound(ErrorBound{ErrorBound::Mode::relative, eb}, f);
          auto pc = check_postconditions(f, g.values, xi);
          if (pc.ok())
            ++ok;
          else if (first_fail.empty())
            first_fail = kKindNames[kind] + std::string(" ") + ds + " seed " +
                         std::to_string(seed) + " eb " + std::to_string(eb);
        }
      }
    }
  }
  std::ostringstream detail;
  detail << ok << "/" << total << " runs with distortion 0, identical extrema, zero bound "
         << "violations; slowest run " << slowest << " s";
  if (!first_fail.empty()) detail << "; first failure: " << first_fail;
  report(1, "exact preservation through cmd_compress/cmd_decompress", ok == total,
         detail.str());
}

void criterion_2_problem_demo(const std::vector<SuiteRun>& runs) {
  int total = 0, nonzero = 0;
  for (const auto& run : runs) {
    if (run.eb != 1e-2) continue;
    ++total;
    if (run.base_distortion > 0.0) ++nonzero;
  }
  const double frac = total ? double(nonzero) / total : 0.0;
  std::ostringstream detail;
  detail << nonzero << "/" << total << " unedited runs at rel eb 1e-2 have distortion > 0 ("
         << 100.0 * frac << "%)";
  report(2, "lossy base codec corrupts segmentations without edits", frac >= 0.8, detail.str());
}

void criterion_3_oracle_equivalence() {
  std::mt19937_64 rng(2024);
  int failures_here = 0;
  auto run_shape = [&](std::span<const std::uint64_t> dims) {
    for (int trial = 0; trial < 1000; ++trial) {
      Field<double> f;
      f.topo = build_topology(dims);
      f.values.resize(f.topo.vertex_count);
      const bool duplicates = trial % 4 == 0;
      for (auto& v : f.values)
        v = duplicates ? static_cast<double>(rng() % 11)
                       : static_cast<double>(rng() >> 11) * 0x1.0p-53;
      auto labels = compute_labels(f.topo, compute_directions(f.topo, f.data(), kSerial),
                                   kSerial);
      if (!(labels == oracle_labels(f.topo, f.data()))) ++failures_here;
    }
  };
  std::uint64_t d2[] = {8, 8};
  std::uint64_t d3[] = {4, 4, 4};
  run_shape(d2);
  run_shape(d3);
  report(3, "compute_labels equals the walking oracle",
         failures_here == 0,
         "2000 random fields (1000 at 8x8, 1000 at 4x4x4), " +
             std::to_string(failures_here) + " label mismatches");
}

void criterion_4_monotone_invariant(const std::vector<SuiteRun>& runs) {
  int bad = 0;
  for (const auto& run : runs)
    if (!run.monotone_ok) ++bad;
  report(4, "g^(k+1) <= g^(k) pointwise on every instrumented batch", bad == 0,
         std::to_string(runs.size()) + " instrumented runs, " + std::to_string(bad) +
             " monotonicity violations");
}

void criterion_5_codec_exactness() {
  std::mt19937_64 rng(555);
  const std::vector<VertexId> example = {1, 35, 36, 421, 422, 423};
  const bool worked_example =
      delta_encode(example) == std::vector<std::uint64_t>{1, 34, 1, 385, 1, 1};

  std::uint64_t bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::uint64_t universe = 64 + rng() % (1u << 22);
    const std::uint64_t count = 1 + rng() % 512;
    const bool clustered = trial % 2 == 0;
    std::vector<VertexId> indices;
    VertexId v = rng() % 64;
    for (std::uint64_t k = 0; k < count; ++k) {
      indices.push_back(v);
      v += clustered && rng() % 4 != 0 ? 1 : 1 + rng() % (universe / count + 2);
    }
    const auto backend = trial % 3 == 0 ? BackendCodec::store : BackendCodec::deflate;
    if (trial % 5 == 0) {
      EditSet<float> e;
      e.indices = indices;
      for (std::size_t k = 0; k < indices.size(); ++k)
        e.values.push_back(static_cast<float>(rng()) * 1e-12f);
      auto back = decode_edits<float>(encode_edits(e, backend), backend);
      if (!(back.indices == e.indices && back.values == e.values)) ++bad;
    } else {
      EditSet<double> e;
      e.indices = indices;
      for (std::size_t k = 0; k < indices.size(); ++k)
        e.values.push_back(static_cast<double>(rng()) * 1e-19);
      auto back = decode_edits<double>(encode_edits(e, backend), backend);
      if (!(back.indices == e.indices && back.values == e.values)) ++bad;
    }
  }
  report(5, "edit codec bit-exact round trips plus the worked delta example",
         worked_example && bad == 0,
         "10000 random edit sets, " + std::to_string(bad) +
             " mismatches; {1,35,36,421,422,423} -> {1,34,1,385,1,1} " +
             (worked_example ? "reproduced" : "WRONG"));
}

void criterion_6_base_codec_bound() {
  std::mt19937_64 rng(66);
  std::uint64_t bound_bad = 0, recon_bad = 0;
  int total = 0;
  const std::vector<std::vector<std::uint64_t>> shapes = {
      {64, 64}, {32, 32, 32}, {17, 9}, {9, 7, 5}, {128, 16}};
  for (int trial = 0; trial < 100; ++trial) {
    const auto& dims = shapes[trial % shapes.size()];
    const auto kind = kKinds[trial % 3];
    ++total;
    if (trial % 4 == 0) {
      auto f = generate_synthetic<float>(kind, dims, trial);
      double lo, hi;
      value_range(f, lo, hi);
      const double xi = (trial % 2 ? 1e-2 : 1e-3) * (hi - lo);
      auto r = compress_base(f.topo, f.data(), xi);
      for (VertexId v = 0; v < f.size(); ++v)
        if (std::abs(double(f.values[v]) - double(r.reconstruction[v])) > xi) ++bound_bad;
      if (decompress_base<float>(r.payload, f.topo, xi) != r.reconstruction) ++recon_bad;
    } else {
      auto f = generate_synthetic<double>(kind, dims, trial);
      double lo, hi;
      value_range(f, lo, hi);
      const double xi = (trial % 2 ? 1e-2 : 1e-3) * (hi - lo);
      auto r = compress_base(f.topo, f.data(), xi);
      for (VertexId v = 0; v < f.size(); ++v)
        if (std::abs(f.values[v] - r.reconstruction[v]) > xi) ++bound_bad;
      if (decompress_base<double>(r.payload, f.topo, xi) != r.reconstruction) ++recon_bad;
    }
  }
  report(6, "base codec bound and compressor/decompressor bit-equality",
         bound_bad == 0 && recon_bad == 0,
         std::to_string(total) + " fields, " + std::to_string(bound_bad) +
             " bound violations, " + std::to_string(recon_bad) + " reconstruction mismatches");
}

void criterion_7_parallel(const std::vector<SuiteRun>& runs) {
  int bad = 0;
  for (const auto& run : runs)
    for (bool ok : run.parallel_ok)
      if (!ok) ++bad;

  // direction-update + labeling phase speedup on the 32^3 fields
  std::vector<Field<double>> fields;
  for (int kind = 0; kind < 3; ++kind)
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed)
      fields.push_back(generate_synthetic<double>(kKinds[kind], suite_dims(1), seed));

  auto phase_time = [&](const ExecPolicy& policy) {
    DirectionField dirs;
    SegmentationLabels labels;
    std::vector<VertexId> scratch;
    const auto t0 = Clock::now();
    for (int rep = 0; rep < 8; ++rep) {
      for (const auto& f : fields) {
        compute_directions(f.topo, f.data(), policy, dirs);
        compute_labels_into(f.topo, dirs, policy, labels, scratch);
      }
    }
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };
  phase_time(kSerial);  // warm up caches and the thread pool
  const double t_serial = phase_time(kSerial);
  const double t_par = phase_time(ExecPolicy{8, false});
  const double speedup = t_serial / t_par;

  std::ostringstream detail;
  detail << runs.size() * 3 << " parallel runs, " << bad
         << " postcondition failures; direction+label speedup at 8 threads: " << speedup
         << "x (serial " << t_serial << " s, 8T " << t_par << " s, hardware threads: "
         << std::thread::hardware_concurrency() << ")";
  report(7, "parallel equivalence and phase speedup", bad == 0 && speedup >= 2.0, detail.str());
}

void criterion_8_edit_ratio_trend(const std::vector<SuiteRun>& runs) {
  std::vector<double> low, high;
  for (const auto& run : runs) {
    if (run.kind != 0 || run.dims_which != 0) continue;  // gaussian-mixture 64x64
    (run.eb == 1e-3 ? low : high).push_back(run.edit_ratio);
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  const double m_low = median(low), m_high = median(high);
  std::ostringstream detail;
  detail << "median edit ratio " << m_high << " at 1e-2 vs " << m_low << " at 1e-3 over "
         << low.size() << " seeds";
  report(8, "edit ratio grows with the error bound", m_high >= m_low, detail.str());
}

void criterion_9_external_mode(TempDir& tmp) {
  int total = 0, ok = 0;
  for (int kind = 0; kind < 3; ++kind) {
    for (int dw = 0; dw < 2; ++dw) {
      const auto dims = suite_dims(dw);
      const std::string ds = dims_str(dims);
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        auto f = generate_synthetic<double>(kKinds[kind], dims, seed + 100);
        const double xi = resolve_bound(ErrorBound{ErrorBound::Mode::relative, 1e-2}, f);
        // builtin codec posing as a third-party compressor: only raw files
        // cross the interface
        auto base = compress_base(f.topo, f.data(), xi);
        Field<double> fhat;
        fhat.topo = f.topo;
        fhat.values = base.reconstruction;
        const auto orig = tmp.file("c9_f.raw");
        const auto dec = tmp.file("c9_fhat.raw");
        const auto fixed = tmp.file("c9_fixed.raw");
        const auto edits = tmp.file("c9_edits.mssz");
        store_raw(f, orig);
        store_raw(fhat, dec);
        ++total;
        std::ostringstream cmd;
        cmd << "fix --original " << orig << " --decompressed " << dec << " --dims " << ds
            << " --dtype f64 --eb " << xi << " --edits-out " << edits << " --output " << fixed
            << " --serial";
        if (run_cli(cmd.str()) != 0) continue;
        auto g = load_raw<double>(fixed, dims);
        if (check_postconditions(f, g.values, xi).ok()) ++ok;
      }
    }
  }
  report(9, "cmd_fix repairs external decompressed pairs exactly", ok == total,
         std::to_string(ok) + "/" + std::to_string(total) + " external pairs fixed to "
         "distortion 0 within the bound");
}

}  // namespace

int main() {
  TempDir tmp;
  std::cout << "mssz acceptance suite (" << kSeeds << " seeds per kind)" << std::endl;

  const auto t0 = Clock::now();
  criterion_1_exact_preservation(tmp);

  auto runs = run_suite();
  criterion_2_problem_demo(runs);
  criterion_3_oracle_equivalence();
  criterion_4_monotone_invariant(runs);
  criterion_5_codec_exactness();
  criterion_6_base_codec_bound();
  criterion_7_parallel(runs);
  criterion_8_edit_ratio_trend(runs);
  criterion_9_external_mode(tmp);

  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
            << " (total " << std::chrono::duration<double>(Clock::now() - t0).count() << " s)"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
