#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace irtgrid {

/// Reproducibility record written atomically alongside every CLI output:
/// resolved configuration (defaults materialized), input digests, seed and
/// timestamps. Re-running with identical inputs and seed reproduces
/// identical primary outputs; only the timestamps differ here.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;         // flag -> resolved value
  std::vector<std::pair<std::string, std::string>> input_digests;  // path -> sha256 hex
  std::uint64_t seed = 0;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

std::string utc_timestamp_now();

std::string manifest_to_json(const RunManifest& manifest);

/// Writes <output_path>.manifest.json next to the named output.
void write_manifest(const std::string& output_path, const RunManifest& manifest);

}  // namespace irtgrid
