#include "irtgrid/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "irtgrid/fsio.hpp"

namespace irtgrid {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * digest_len);
  for (unsigned int i = 0; i < digest_len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file_hex(const std::string& path) { return sha256_hex(read_file(path)); }

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["tool_version"] = manifest.tool_version;
  doc["subcommand"] = manifest.subcommand;
  auto config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : manifest.config) {
    config[key] = value;
  }
  doc["config"] = std::move(config);
  auto digests = nlohmann::ordered_json::object();
  for (const auto& [path, digest] : manifest.input_digests) {
    digests[path] = digest;
  }
  doc["input_digests"] = std::move(digests);
  doc["seed"] = manifest.seed;
  doc["started_at"] = manifest.started_at;
  doc["finished_at"] = manifest.finished_at;
  return doc.dump(2) + "\n";
}

void write_manifest(const std::string& output_path, const RunManifest& manifest) {
  atomic_write_file(output_path + ".manifest.json", manifest_to_json(manifest));
}

}  // namespace irtgrid
