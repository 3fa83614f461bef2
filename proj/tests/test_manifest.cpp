#include <doctest.h>

#include <filesystem>

#include "irtgrid/errors.hpp"
#include "irtgrid/fsio.hpp"
#include "irtgrid/manifest.hpp"
#include "irtgrid/rng.hpp"

using namespace irtgrid;

TEST_CASE("sha256 matches the NIST test vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest serializes all fields and writes next to the output") {
  const auto dir = std::filesystem::temp_directory_path() / "irtgrid_manifest_test";
  std::filesystem::create_directories(dir);
  const auto out = (dir / "result.csv").string();
  atomic_write_file(out, "data\n");

  RunManifest manifest;
  manifest.tool_version = "0.1.0";
  manifest.subcommand = "bin";
  manifest.seed = 42;
  manifest.config = {{"k", "10"}};
  manifest.input_digests = {{out, sha256_file_hex(out)}};
  manifest.started_at = utc_timestamp_now();
  manifest.finished_at = utc_timestamp_now();
  write_manifest(out, manifest);

  const auto text = read_file(out + ".manifest.json");
  CHECK(text.find("\"subcommand\": \"bin\"") != std::string::npos);
  CHECK(text.find("\"k\": \"10\"") != std::string::npos);
  CHECK(text.find(sha256_hex("data\n")) != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("atomic_write_file leaves no partial target on failure") {
  const auto missing_dir =
      (std::filesystem::temp_directory_path() / "irtgrid_no_such_dir" / "x.txt").string();
  CHECK_THROWS(atomic_write_file(missing_dir, "content"));
  CHECK_FALSE(std::filesystem::exists(missing_dir));
}

TEST_CASE("seed stream mixing separates tags") {
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));

  Rng a(mix_seed(9, 0)), b(mix_seed(9, 1));
  CHECK(a.normal() != b.normal());
}

TEST_CASE("rng produces sane uniform and normal draws") {
  Rng rng(123);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sumsq / n - 1.0) < 0.05);

  // uniform_below covers the range without bias at the edges.
  Rng r2(7);
  std::size_t low = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r2.uniform_below(10);
    CHECK(v < 10);
    low += v == 0;
  }
  CHECK(low > 50);
  CHECK(low < 200);
}
