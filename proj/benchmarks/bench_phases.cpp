// Microbenchmarks for the pipeline phases: direction updates, label
// computation (path compression), false-critical detection and fixes, the
// base codec, and the edit codec.

#include <benchmark/benchmark.h>

#include <random>

#include "mssz/base_codec.hpp"
#include "mssz/edit_codec.hpp"
#include "mssz/edit_engine.hpp"
#include "mssz/field.hpp"
#include "mssz/mss.hpp"

using namespace mssz;

namespace {

Field<double> bench_field_2d(std::uint64_t extent, std::uint64_t seed) {
  std::uint64_t dims[] = {extent, extent};
  return generate_synthetic<double>(SyntheticKind::gaussian_mixture, dims, seed);
}

Field<double> bench_field_3d(std::uint64_t extent, std::uint64_t seed) {
  std::uint64_t dims[] = {extent, extent, extent};
  return generate_synthetic<double>(SyntheticKind::gaussian_mixture, dims, seed);
}

double relative_xi(const Field<double>& f, double rel) {
  double lo, hi;
  value_range(f, lo, hi);
  return rel * (hi - lo);
}

void BM_UpdateDirections3D(benchmark::State& state) {
  const auto f = bench_field_3d(static_cast<std::uint64_t>(state.range(0)), 1);
  ExecPolicy policy{static_cast<int>(state.range(1)), false};
  DirectionField dirs;
  for (auto _ : state) {
    compute_directions(f.topo, f.data(), policy, dirs);
    benchmark::DoNotOptimize(dirs.asc.data());
  }
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_UpdateDirections3D)->ArgsProduct({{32, 64}, {1, 2, 4}});

void BM_ComputeLabels3D(benchmark::State& state) {
  const auto f = bench_field_3d(static_cast<std::uint64_t>(state.range(0)), 1);
  ExecPolicy policy{static_cast<int>(state.range(1)), false};
  const auto dirs = compute_directions(f.topo, f.data(), policy);
  SegmentationLabels labels;
  std::vector<VertexId> scratch;
  for (auto _ : state) {
    compute_labels_into(f.topo, dirs, policy, labels, scratch);
    benchmark::DoNotOptimize(labels.max_label.data());
  }
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_ComputeLabels3D)->ArgsProduct({{32, 64}, {1, 2, 4}});

void BM_DetectFalseCritical(benchmark::State& state) {
  const auto f = bench_field_3d(32, 2);
  const double xi = relative_xi(f, 1e-2);
  const auto base = compress_base(f.topo, f.data(), xi);
  ExecPolicy policy{static_cast<int>(state.range(0)), false};
  EditState<double> es(f.topo, f.data(), base.reconstruction.data(), xi, policy);
  for (auto _ : state) {
    const auto& report = es.detect_false_critical();
    benchmark::DoNotOptimize(report.total());
  }
}
BENCHMARK(BM_DetectFalseCritical)->Arg(1)->Arg(2)->Arg(4);

void BM_FixFalseCritical(benchmark::State& state) {
  const auto f = bench_field_3d(32, 2);
  const double xi = relative_xi(f, 1e-2);
  const auto base = compress_base(f.topo, f.data(), xi);
  for (auto _ : state) {
    state.PauseTiming();  // reset to the initial decompressed data
    EditState<double> es(f.topo, f.data(), base.reconstruction.data(), xi,
                         ExecPolicy::serial_policy());
    const auto& report = es.detect_false_critical();
    state.ResumeTiming();
    benchmark::DoNotOptimize(es.fix_fp_max(report));
    benchmark::DoNotOptimize(es.fix_fn_min(report));
  }
}
BENCHMARK(BM_FixFalseCritical);

void BM_DeriveEdits2D(benchmark::State& state) {
  const auto f = bench_field_2d(static_cast<std::uint64_t>(state.range(0)), 3);
  const double xi = relative_xi(f, 1e-2);
  const auto base = compress_base(f.topo, f.data(), xi);
  DeriveOptions<double> opts;
  opts.policy = ExecPolicy::serial_policy();
  for (auto _ : state) {
    auto edits = derive_edits(f.topo, f.data(), base.reconstruction.data(), xi, opts);
    benchmark::DoNotOptimize(edits.size());
  }
}
BENCHMARK(BM_DeriveEdits2D)->Arg(48)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BaseCompress3D(benchmark::State& state) {
  const auto f = bench_field_3d(32, 4);
  const double xi = relative_xi(f, 1e-3);
  for (auto _ : state) {
    auto result = compress_base(f.topo, f.data(), xi);
    benchmark::DoNotOptimize(result.payload.size());
  }
  state.SetBytesProcessed(state.iterations() * f.size() * sizeof(double));
}
BENCHMARK(BM_BaseCompress3D);

void BM_BaseDecompress3D(benchmark::State& state) {
  const auto f = bench_field_3d(32, 4);
  const double xi = relative_xi(f, 1e-3);
  const auto base = compress_base(f.topo, f.data(), xi);
  for (auto _ : state) {
    auto recon = decompress_base<double>(base.payload, f.topo, xi);
    benchmark::DoNotOptimize(recon.data());
  }
  state.SetBytesProcessed(state.iterations() * f.size() * sizeof(double));
}
BENCHMARK(BM_BaseDecompress3D);

void BM_EncodeEdits(benchmark::State& state) {
  std::mt19937_64 rng(7);
  EditSet<double> edits;
  VertexId v = 0;
  for (int k = 0; k < 20000; ++k) {
    v += 1 + (rng() % 3 == 0 ? rng() % 500 : 0);  // clustered patches
    edits.indices.push_back(v);
    edits.values.push_back(static_cast<double>(rng()) * 1e-19);
  }
  for (auto _ : state) {
    auto payload = encode_edits(edits, BackendCodec::deflate);
    benchmark::DoNotOptimize(payload.size());
  }
  state.SetItemsProcessed(state.iterations() * edits.size());
}
BENCHMARK(BM_EncodeEdits);

}  // namespace

BENCHMARK_MAIN();
