#include "cli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>

#include <openssl/evp.h>

#include "etfp/design_io.hpp"
#include "etfp/errors.hpp"

namespace etfp::cli {

std::string sha256_hex(const std::string &bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::filesystem::path &path) {
  input_digests.emplace_back(path.string(), sha256_hex(read_file(path)));
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["arguments"] = arguments;
  j["config"] = config;
  auto &inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto &[path, digest] : input_digests) {
    inputs.push_back({{"path", path}, {"sha256", digest}});
  }
  j["master_seed"] = master_seed ? nlohmann::ordered_json(*master_seed) : nlohmann::ordered_json();
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  return j;
}

RunManifest make_manifest(std::string command) {
  RunManifest m;
  m.command = std::move(command);
  m.tool_version = ETFP_VERSION;
  m.timestamp = utc_timestamp();
  return m;
}

std::filesystem::path manifest_path(const std::filesystem::path &output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

void write_manifest(const std::filesystem::path &output, const RunManifest &m) {
  write_file_atomic(manifest_path(output), m.to_json().dump(2) + "\n");
}

}  // namespace etfp::cli
