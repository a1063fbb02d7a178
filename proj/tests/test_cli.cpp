// End-to-end tests of the mssz binary (the path comes in via MSSZ_BIN_PATH).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mssz/edit_codec.hpp"
#include "mssz/field.hpp"
#include "mssz/metrics.hpp"
#include "mssz/mss.hpp"

using namespace mssz;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mssz_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& cmdline) {
  const std::string full = std::string(MSSZ_BIN_PATH) + " " + cmdline + " >/dev/null 2>&1";
  int rc = std::system(full.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("compress/decompress round trip preserves the segmentation") {
  TempDir tmp;
  std::uint64_t dims[] = {24, 24};
  auto f = generate_synthetic<double>(SyntheticKind::gaussian_mixture, dims, 12);
  store_raw(f, tmp.file("f.raw"));

  CHECK(run("compress --input " + tmp.file("f.raw") +
            " --dims 24x24 --dtype f64 --eb 1e-2 --eb-mode rel --output " +
            tmp.file("a.mssz") + " --serial") == 0);
  CHECK(run("decompress --input " + tmp.file("a.mssz") + " --output " + tmp.file("g.raw")) == 0);

  auto g = load_raw<double>(tmp.file("g.raw"), dims);
  auto lf = compute_labels(f.topo, compute_directions(f.topo, f.data()));
  auto lg = compute_labels(f.topo, compute_directions(f.topo, g.data()));
  CHECK(segmentation_equal(lf, lg).mismatches == 0);

  double lo, hi;
  value_range(f, lo, hi);
  CHECK(count_bound_violations(f, g, 1e-2 * (hi - lo)) == 0);

  // verify agrees and exits 0
  CHECK(run("verify --original " + tmp.file("f.raw") + " --candidate " + tmp.file("g.raw") +
            " --dims 24x24 --dtype f64 --eb 1e-2 --eb-mode rel") == 0);
}

TEST_CASE("compression is deterministic under --serial") {
  TempDir tmp;
  std::uint64_t dims[] = {16, 16};
  auto f = generate_synthetic<double>(SyntheticKind::trig, dims, 3);
  store_raw(f, tmp.file("f.raw"));
  const std::string cmd = "compress --input " + tmp.file("f.raw") +
                          " --dims 16x16 --dtype f64 --eb 1e-2 --eb-mode rel --serial --output ";
  CHECK(run(cmd + tmp.file("a1.mssz")) == 0);
  CHECK(run(cmd + tmp.file("a2.mssz")) == 0);
  CHECK(slurp(tmp.file("a1.mssz")) == slurp(tmp.file("a2.mssz")));
}

TEST_CASE("verify rejects a 2-xi perturbation") {
  TempDir tmp;
  std::uint64_t dims[] = {12, 12};
  auto f = generate_synthetic<double>(SyntheticKind::gaussian_mixture, dims, 4);
  store_raw(f, tmp.file("f.raw"));
  auto g = f;
  double lo, hi;
  value_range(f, lo, hi);
  g.values[50] += 2.0 * 1e-2 * (hi - lo);
  store_raw(g, tmp.file("g.raw"));
  CHECK(run("verify --original " + tmp.file("f.raw") + " --candidate " + tmp.file("g.raw") +
            " --dims 12x12 --dtype f64 --eb 1e-2 --eb-mode rel") != 0);
}

TEST_CASE("fix handles an external decompressed pair") {
  TempDir tmp;
  std::uint64_t dims[] = {20, 20};
  auto f = generate_synthetic<double>(SyntheticKind::random_smooth, dims, 8);
  store_raw(f, tmp.file("f.raw"));
  // stand in for a third-party compressor: perturb within the bound
  double lo, hi;
  value_range(f, lo, hi);
  const double xi = 1e-2 * (hi - lo);
  auto fhat = f;
  std::mt19937_64 rng(99);
  for (auto& v : fhat.values)
    v += (static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * 0.9 * xi;
  store_raw(fhat, tmp.file("fhat.raw"));

  CHECK(run("fix --original " + tmp.file("f.raw") + " --decompressed " + tmp.file("fhat.raw") +
            " --dims 20x20 --dtype f64 --eb " + std::to_string(xi) + " --edits-out " +
            tmp.file("edits.mssz") + " --output " + tmp.file("fixed.raw") + " --serial") == 0);

  CHECK(run("verify --original " + tmp.file("f.raw") + " --candidate " + tmp.file("fixed.raw") +
            " --dims 20x20 --dtype f64 --eb " + std::to_string(xi)) == 0);

  // the edits archive applies to the external field via decompress --base
  CHECK(run("decompress --input " + tmp.file("edits.mssz") + " --base " + tmp.file("fhat.raw") +
            " --output " + tmp.file("fixed2.raw")) == 0);
  CHECK(slurp(tmp.file("fixed.raw")) == slurp(tmp.file("fixed2.raw")));
}

TEST_CASE("mss exports M then m as u64 arrays") {
  TempDir tmp;
  std::uint64_t dims[] = {6, 5};
  auto f = generate_synthetic<double>(SyntheticKind::trig, dims, 2);
  store_raw(f, tmp.file("f.raw"));
  CHECK(run("mss --input " + tmp.file("f.raw") + " --dims 6x5 --dtype f64 --output " +
            tmp.file("labels.bin")) == 0);
  auto bytes = slurp(tmp.file("labels.bin"));
  REQUIRE(bytes.size() == 2 * 8 * f.size());
  auto labels = compute_labels(f.topo, compute_directions(f.topo, f.data()));
  for (VertexId v = 0; v < f.size(); ++v) {
    std::uint64_t m = 0;
    for (int b = 0; b < 8; ++b) m |= std::uint64_t(bytes[v * 8 + b]) << (8 * b);
    CHECK(m == labels.max_label[v]);
  }
}

TEST_CASE("generate writes deterministic fields") {
  TempDir tmp;
  CHECK(run("generate --kind trig --dims 8x8 --seed 5 --output " + tmp.file("a.raw")) == 0);
  CHECK(run("generate --kind trig --dims 8x8 --seed 5 --output " + tmp.file("b.raw")) == 0);
  CHECK(slurp(tmp.file("a.raw")) == slurp(tmp.file("b.raw")));
}

TEST_CASE("bench emits one CSV row per run") {
  TempDir tmp;
  CHECK(run("bench --kind trig --dims 12x12 --seeds 2 --eb 1e-2 --eb-mode rel --serial "
            "--output " +
            tmp.file("rows.csv")) == 0);
  std::ifstream in(tmp.file("rows.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);  // header + 2 seeds
}

TEST_CASE("exit codes: usage and missing files") {
  TempDir tmp;
  CHECK(run("compress --nonsense") == 2);
  CHECK(run("verify --original missing.raw --candidate also_missing.raw --dims 4x4 --eb 1") == 3);
  CHECK(run("decompress --input " + tmp.file("nope.mssz") + " --output " + tmp.file("o.raw")) ==
        3);
  // a corrupt archive yields the corrupt-archive code
  std::ofstream bad(tmp.file("bad.mssz"), std::ios::binary);
  bad << "not an archive";
  bad.close();
  CHECK(run("decompress --input " + tmp.file("bad.mssz") + " --output " + tmp.file("o.raw")) ==
        6);
}

TEST_CASE("no-preserve skips edits and reports honestly") {
  TempDir tmp;
  std::uint64_t dims[] = {32, 32};
  auto f = generate_synthetic<double>(SyntheticKind::random_smooth, dims, 17);
  store_raw(f, tmp.file("f.raw"));
  CHECK(run("compress --input " + tmp.file("f.raw") +
            " --dims 32x32 --dtype f64 --eb 1e-2 --eb-mode rel --no-preserve --serial "
            "--output " +
            tmp.file("a.mssz") + " --report-json " + tmp.file("r.json")) == 0);
  auto archive = read_archive_file(tmp.file("a.mssz"));
  auto edits = decode_edits<double>(archive.edit_payload, parse_backend(archive.edit_codec));
  CHECK(edits.empty());

  std::ifstream in(tmp.file("r.json"));
  std::string json((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(json.find("mss_distortion") != std::string::npos);
}
