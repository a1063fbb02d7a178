// mssz: error-bounded lossy compression that preserves the Morse-Smale
// segmentation of 2D/3D scalar fields exactly.
//
// Exit codes: 0 ok, 1 verification failed, 2 usage, 3 I/O, 4 bound violation,
// 5 non-convergence, 6 corrupt archive, 7 internal error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mssz/base_codec.hpp"
#include "mssz/edit_codec.hpp"
#include "mssz/edit_engine.hpp"
#include "mssz/field.hpp"
#include "mssz/metrics.hpp"
#include "mssz/mss.hpp"

namespace fs = std::filesystem;
using namespace mssz;

namespace {

std::vector<std::uint64_t> parse_dims(const std::string& spec) {
  std::vector<std::uint64_t> dims;
  std::string token;
  for (char c : spec + "x") {
    if (c == 'x' || c == 'X' || c == ',') {
      if (!token.empty()) {
        try {
          dims.push_back(std::stoull(token));
        } catch (const std::exception&) {
          raise(ErrKind::usage, "bad dims component '" + token + "'");
        }
        token.clear();
      }
    } else {
      token += c;
    }
  }
  if (dims.size() != 2 && dims.size() != 3)
    raise(ErrKind::usage, "--dims expects WxH or WxHxD");
  return dims;
}

ExecPolicy make_policy(int threads, bool serial) {
  ExecPolicy policy;
  policy.serial = serial;
  if (threads > 0) {
    policy.threads = threads;
  } else if (const char* env = std::getenv("MSSZ_THREADS")) {
    policy.threads = std::max(0, std::atoi(env));
  }
  return policy;
}

std::uint64_t file_size_of(const fs::path& path) {
  std::error_code ec;
  auto size = fs::file_size(path, ec);
  if (ec) raise(ErrKind::io, "cannot stat '" + path.string() + "'");
  return size;
}

void count_false_extrema(const DirectionField& df, const DirectionField& dg,
                         VerificationReport& report) {
  for (VertexId v = 0; v < df.asc.size(); ++v) {
    if (dg.asc[v] == v && df.asc[v] != v)
      ++report.fp_max;
    else if (dg.desc[v] == v && df.desc[v] != v)
      ++report.fp_min;
    else if (df.asc[v] == v && dg.asc[v] != v)
      ++report.fn_max;
    else if (df.desc[v] == v && dg.desc[v] != v)
      ++report.fn_min;
  }
}

template <class T>
VerificationReport build_report(const Field<T>& original, const Field<T>& candidate, double xi,
                                std::uint64_t edit_count, std::uint64_t archive_bytes,
                                const ExecPolicy& policy) {
  VerificationReport report;
  auto df = compute_directions(original.topo, original.data(), policy);
  auto dg = compute_directions(original.topo, candidate.data(), policy);
  auto lf = compute_labels(original.topo, df, policy);
  auto lg = compute_labels(original.topo, dg, policy);
  report.mss_distortion = mss_distortion(lf, lg);
  report.right_labeled_ratio = 1.0 - report.mss_distortion;
  report.psnr = psnr(original, candidate);
  report.edit_ratio = edit_ratio(edit_count, original.size());
  if (archive_bytes != 0) {
    auto sizes = ocr_obr(original.size() * sizeof(T), archive_bytes, original.size());
    report.ocr = sizes.ocr;
    report.obr = sizes.obr;
  }
  report.bound_violations = count_bound_violations(original, candidate, xi);
  count_false_extrema(df, dg, report);
  return report;
}

void emit_report(const VerificationReport& report, const std::string& json_path) {
  print_report(std::cout, report);
  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) raise(ErrKind::io, "cannot open '" + json_path + "' for writing");
    out << report_to_json(report) << "\n";
  }
}

struct CompressArgs {
  std::string input, output, dims, dtype = "f64", eb_mode = "abs", report_json;
  double eb = 0.0;
  int threads = 0;
  bool serial = false;
  bool no_preserve = false;
  bool store_backend = false;
};

template <class T>
int run_compress(const CompressArgs& args) {
  const auto dims = parse_dims(args.dims);
  const auto policy = make_policy(args.threads, args.serial);
  auto f = load_raw<T>(args.input, dims);
  const double xi = resolve_bound(ErrorBound{parse_eb_mode(args.eb_mode), args.eb}, f);

  auto base = compress_base(f.topo, f.data(), xi);

  EditSet<T> edits;
  EditStats stats;
  if (!args.no_preserve) {
    DeriveOptions<T> opts;
    opts.policy = policy;
    edits = derive_edits(f.topo, f.data(), base.reconstruction.data(), xi, opts, &stats);
  }

  const auto backend = args.store_backend ? BackendCodec::store : BackendCodec::deflate;
  Archive archive;
  archive.dtype = sizeof(T) == 4 ? DType::f32 : DType::f64;
  archive.dims = dims;
  archive.xi = xi;
  archive.base_codec = 1;
  archive.base_payload = std::move(base.payload);
  archive.edit_codec = static_cast<std::uint8_t>(backend);
  archive.edit_payload = encode_edits(edits, backend);
  write_archive_file(archive, args.output);

  Field<T> candidate;
  candidate.topo = f.topo;
  candidate.values = apply_edits(f.topo, base.reconstruction.data(), edits);
  auto report = build_report(f, candidate, xi, edits.size(), file_size_of(args.output), policy);
  emit_report(report, args.report_json);
  std::cerr << "compressed " << args.input << " -> " << args.output << " (xi=" << xi
            << ", edits=" << edits.size() << ", outer=" << stats.outer_iterations << ")\n";
  return 0;
}

struct DecompressArgs {
  std::string input, output, base;
};

template <class T>
int run_decompress(const Archive& archive, const DecompressArgs& args) {
  GridTopology topo = build_topology(archive.dims);
  std::vector<T> recon;
  if (archive.base_codec == 1) {
    recon = decompress_base<T>(archive.base_payload, topo, archive.xi);
  } else {
    if (args.base.empty())
      raise(ErrKind::usage,
            "archive carries no builtin payload; pass --base with the external "
            "decompressed raw file");
    recon = load_raw<T>(args.base, archive.dims).values;
  }
  auto edits = decode_edits<T>(archive.edit_payload, parse_backend(archive.edit_codec));
  Field<T> out;
  out.topo = topo;
  out.values = apply_edits(topo, recon.data(), edits);
  store_raw(out, args.output);
  return 0;
}

struct FixArgs {
  std::string original, decompressed, output, edits_out, dims, dtype = "f64",
              eb_mode = "abs", report_json;
  double eb = 0.0;
  int threads = 0;
  bool serial = false;
  bool force = false;
  bool store_backend = false;
};

template <class T>
int run_fix(const FixArgs& args) {
  const auto dims = parse_dims(args.dims);
  const auto policy = make_policy(args.threads, args.serial);
  auto f = load_raw<T>(args.original, dims);
  auto fhat = load_raw<T>(args.decompressed, dims);
  const double xi = resolve_bound(ErrorBound{parse_eb_mode(args.eb_mode), args.eb}, f);

  DeriveOptions<T> opts;
  opts.policy = policy;
  opts.force = args.force;
  EditStats stats;
  auto edits = derive_edits(f.topo, f.data(), fhat.data(), xi, opts, &stats);

  const auto backend = args.store_backend ? BackendCodec::store : BackendCodec::deflate;
  Archive archive;
  archive.dtype = sizeof(T) == 4 ? DType::f32 : DType::f64;
  archive.dims = dims;
  archive.xi = xi;
  archive.base_codec = 0;  // external
  archive.edit_codec = static_cast<std::uint8_t>(backend);
  archive.edit_payload = encode_edits(edits, backend);
  write_archive_file(archive, args.edits_out);

  Field<T> fixed;
  fixed.topo = f.topo;
  fixed.values = apply_edits(f.topo, fhat.data(), edits);
  store_raw(fixed, args.output);

  auto report =
      build_report(f, fixed, xi, edits.size(), file_size_of(args.edits_out), policy);
  emit_report(report, args.report_json);
  std::cerr << "fixed " << args.decompressed << " -> " << args.output << " (edits=" << edits.size()
            << ", outer=" << stats.outer_iterations << ")\n";
  return 0;
}

struct VerifyArgs {
  std::string original, candidate, dims, dtype = "f64", eb_mode = "abs", report_json;
  double eb = 0.0;
  int threads = 0;
  bool serial = false;
};

template <class T>
int run_verify(const VerifyArgs& args) {
  const auto dims = parse_dims(args.dims);
  const auto policy = make_policy(args.threads, args.serial);
  auto f = load_raw<T>(args.original, dims);
  auto g = load_raw<T>(args.candidate, dims);
  const double xi = resolve_bound(ErrorBound{parse_eb_mode(args.eb_mode), args.eb}, f);
  auto report = build_report(f, g, xi, 0, 0, policy);
  emit_report(report, args.report_json);
  return (report.mss_distortion == 0.0 && report.bound_violations == 0) ? 0 : 1;
}

struct MssArgs {
  std::string input, output, dims, dtype = "f64";
  int threads = 0;
  bool serial = false;
};

template <class T>
int run_mss(const MssArgs& args) {
  const auto dims = parse_dims(args.dims);
  const auto policy = make_policy(args.threads, args.serial);
  auto f = load_raw<T>(args.input, dims);
  auto labels = compute_labels(f.topo, compute_directions(f.topo, f.data(), policy), policy);
  export_labels(labels, args.output);
  return 0;
}

struct GenerateArgs {
  std::string kind = "gaussian-mixture", output, dims, dtype = "f64";
  std::uint64_t seed = 0;
};

template <class T>
int run_generate(const GenerateArgs& args) {
  const auto dims = parse_dims(args.dims);
  auto f = generate_synthetic<T>(parse_synthetic_kind(args.kind), dims, args.seed);
  store_raw(f, args.output);
  return 0;
}

struct BenchArgs {
  std::vector<std::string> kinds = {"gaussian-mixture", "trig", "random-smooth"};
  std::vector<double> ebs = {1e-3, 1e-2};
  std::string dims = "64x64", dtype = "f64", eb_mode = "rel", output;
  std::uint64_t seeds = 5;
  int threads = 0;
  bool serial = false;
};

template <class T>
int run_bench(const BenchArgs& args) {
  const auto dims = parse_dims(args.dims);
  const auto policy = make_policy(args.threads, args.serial);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.output.empty()) {
    file.open(args.output, std::ios::trunc);
    if (!file) raise(ErrKind::io, "cannot open '" + args.output + "' for writing");
    out = &file;
  }
  *out << csv_header() << "\n";

  for (const auto& kind_name : args.kinds) {
    const auto kind = parse_synthetic_kind(kind_name);
    for (std::uint64_t seed = 0; seed < args.seeds; ++seed) {
      auto f = generate_synthetic<T>(kind, dims, seed);
      for (double eb : args.ebs) {
        const double xi = resolve_bound(ErrorBound{parse_eb_mode(args.eb_mode), eb}, f);
        const auto t0 = std::chrono::steady_clock::now();
        auto base = compress_base(f.topo, f.data(), xi);

        DeriveOptions<T> opts;
        opts.policy = policy;
        EditStats stats;
        auto edits = derive_edits(f.topo, f.data(), base.reconstruction.data(), xi, opts, &stats);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();

        Archive archive;
        archive.dtype = sizeof(T) == 4 ? DType::f32 : DType::f64;
        archive.dims = dims;
        archive.xi = xi;
        archive.base_codec = 1;
        archive.base_payload = std::move(base.payload);
        archive.edit_codec = static_cast<std::uint8_t>(BackendCodec::deflate);
        archive.edit_payload = encode_edits(edits, BackendCodec::deflate);
        const std::uint64_t archive_bytes = write_archive(archive).size();

        Field<T> before;
        before.topo = f.topo;
        before.values = decompress_base<T>(archive.base_payload, f.topo, xi);
        auto base_report = build_report(f, before, xi, 0, archive_bytes, policy);

        Field<T> fixed;
        fixed.topo = f.topo;
        fixed.values = apply_edits(f.topo, before.values.data(), edits);
        auto fixed_report =
            build_report(f, fixed, xi, edits.size(), archive_bytes, policy);

        std::ostringstream dims_str;
        for (std::size_t i = 0; i < dims.size(); ++i)
          dims_str << (i ? "x" : "") << dims[i];
        *out << csv_row(kind_name, seed, dims_str.str(), args.eb_mode, eb, xi, base_report,
                        fixed_report, wall, stats.outer_iterations,
                        stats.sub_iterations_total(), stats.r_iterations)
             << "\n";
      }
    }
  }
  return 0;
}

template <class F32, class F64>
int dispatch_dtype(const std::string& dtype, F32&& f32, F64&& f64) {
  return parse_dtype(dtype) == DType::f32 ? f32() : f64();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse-Smale segmentation preserving error-bounded lossy compression"};
  app.require_subcommand(1);

  CompressArgs compress_args;
  auto* compress = app.add_subcommand(
      "compress", "compress a raw field, deriving segmentation-preserving edits");
  compress->add_option("--input", compress_args.input, "raw input field")->required();
  compress->add_option("--dims", compress_args.dims, "grid extents, e.g. 64x64x32")->required();
  compress->add_option("--dtype", compress_args.dtype, "f32 or f64");
  compress->add_option("--eb", compress_args.eb, "error bound magnitude")->required();
  compress->add_option("--eb-mode", compress_args.eb_mode, "abs or rel");
  compress->add_option("--output", compress_args.output, "archive path")->required();
  compress->add_option("--threads", compress_args.threads, "thread count (0 = hardware)");
  compress->add_flag("--serial", compress_args.serial, "deterministic single-thread mode");
  compress->add_flag("--no-preserve", compress_args.no_preserve,
                     "skip segmentation edits (plain lossy compression)");
  compress->add_flag("--store-backend", compress_args.store_backend,
                     "store edit streams raw instead of DEFLATE");
  compress->add_option("--report-json", compress_args.report_json,
                       "also write the report as JSON");

  DecompressArgs decompress_args;
  auto* decompress = app.add_subcommand("decompress", "reconstruct a field from an archive");
  decompress->add_option("--input", decompress_args.input, "archive path")->required();
  decompress->add_option("--output", decompress_args.output, "raw output path")->required();
  decompress->add_option("--base", decompress_args.base,
                         "external decompressed raw field (for archives without a builtin "
                         "payload)");

  FixArgs fix_args;
  auto* fix = app.add_subcommand(
      "fix", "derive edits for an external compressor's decompressed output");
  fix->add_option("--original", fix_args.original, "raw original field")->required();
  fix->add_option("--decompressed", fix_args.decompressed, "raw decompressed field")->required();
  fix->add_option("--dims", fix_args.dims, "grid extents")->required();
  fix->add_option("--dtype", fix_args.dtype, "f32 or f64");
  fix->add_option("--eb", fix_args.eb, "error bound magnitude")->required();
  fix->add_option("--eb-mode", fix_args.eb_mode, "abs or rel");
  fix->add_option("--edits-out", fix_args.edits_out, "edit archive path")->required();
  fix->add_option("--output", fix_args.output, "fixed raw field path")->required();
  fix->add_option("--threads", fix_args.threads, "thread count");
  fix->add_flag("--serial", fix_args.serial, "deterministic single-thread mode");
  fix->add_flag("--force", fix_args.force, "proceed even if |f-fhat| > xi somewhere");
  fix->add_flag("--store-backend", fix_args.store_backend, "store edit streams raw");
  fix->add_option("--report-json", fix_args.report_json, "also write the report as JSON");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand(
      "verify", "check segmentation equality and the bound for a candidate field");
  verify->add_option("--original", verify_args.original, "raw original field")->required();
  verify->add_option("--candidate", verify_args.candidate, "raw candidate field")->required();
  verify->add_option("--dims", verify_args.dims, "grid extents")->required();
  verify->add_option("--dtype", verify_args.dtype, "f32 or f64");
  verify->add_option("--eb", verify_args.eb, "error bound magnitude")->required();
  verify->add_option("--eb-mode", verify_args.eb_mode, "abs or rel");
  verify->add_option("--threads", verify_args.threads, "thread count");
  verify->add_flag("--serial", verify_args.serial, "deterministic single-thread mode");
  verify->add_option("--report-json", verify_args.report_json, "also write the report as JSON");

  MssArgs mss_args;
  auto* mss_cmd = app.add_subcommand("mss", "export Morse-Smale segmentation labels");
  mss_cmd->add_option("--input", mss_args.input, "raw input field")->required();
  mss_cmd->add_option("--dims", mss_args.dims, "grid extents")->required();
  mss_cmd->add_option("--dtype", mss_args.dtype, "f32 or f64");
  mss_cmd->add_option("--output", mss_args.output, "label file (M array then m array, u64 LE)")
      ->required();
  mss_cmd->add_option("--threads", mss_args.threads, "thread count");
  mss_cmd->add_flag("--serial", mss_args.serial, "deterministic single-thread mode");

  GenerateArgs generate_args;
  auto* generate = app.add_subcommand("generate", "write a synthetic test field");
  generate->add_option("--kind", generate_args.kind,
                       "gaussian-mixture, trig, or random-smooth");
  generate->add_option("--dims", generate_args.dims, "grid extents")->required();
  generate->add_option("--seed", generate_args.seed, "generator seed");
  generate->add_option("--dtype", generate_args.dtype, "f32 or f64");
  generate->add_option("--output", generate_args.output, "raw output path")->required();

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "sweep error bounds and emit per-run metrics CSV");
  bench->add_option("--kind", bench_args.kinds, "synthetic kinds to sweep");
  bench->add_option("--eb", bench_args.ebs, "error bounds to sweep");
  bench->add_option("--eb-mode", bench_args.eb_mode, "abs or rel");
  bench->add_option("--dims", bench_args.dims, "grid extents");
  bench->add_option("--dtype", bench_args.dtype, "f32 or f64");
  bench->add_option("--seeds", bench_args.seeds, "seeds per kind");
  bench->add_option("--output", bench_args.output, "CSV path (default stdout)");
  bench->add_option("--threads", bench_args.threads, "thread count");
  bench->add_flag("--serial", bench_args.serial, "deterministic single-thread mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*compress)
      return dispatch_dtype(compress_args.dtype,
                            [&] { return run_compress<float>(compress_args); },
                            [&] { return run_compress<double>(compress_args); });
    if (*decompress) {
      auto archive = read_archive_file(decompress_args.input);
      return archive.dtype == DType::f32
                 ? run_decompress<float>(archive, decompress_args)
                 : run_decompress<double>(archive, decompress_args);
    }
    if (*fix)
      return dispatch_dtype(fix_args.dtype, [&] { return run_fix<float>(fix_args); },
                            [&] { return run_fix<double>(fix_args); });
    if (*verify)
      return dispatch_dtype(verify_args.dtype, [&] { return run_verify<float>(verify_args); },
                            [&] { return run_verify<double>(verify_args); });
    if (*mss_cmd)
      return dispatch_dtype(mss_args.dtype, [&] { return run_mss<float>(mss_args); },
                            [&] { return run_mss<double>(mss_args); });
    if (*generate)
      return dispatch_dtype(generate_args.dtype,
                            [&] { return run_generate<float>(generate_args); },
                            [&] { return run_generate<double>(generate_args); });
    if (*bench)
      return dispatch_dtype(bench_args.dtype, [&] { return run_bench<float>(bench_args); },
                            [&] { return run_bench<double>(bench_args); });
  } catch (const Error& e) {
    std::cerr << "mssz: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "mssz: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
