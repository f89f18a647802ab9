#ifndef ETFP_CLI_MANIFEST_HPP_
#define ETFP_CLI_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace etfp::cli {

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;  // as given, without the program name
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> input_digests;  // path, sha256 hex
  std::optional<std::uint64_t> master_seed;
  std::string tool_version;
  std::string timestamp;  // ISO 8601 UTC

  void add_input(const std::filesystem::path &path);
  nlohmann::ordered_json to_json() const;
};

RunManifest make_manifest(std::string command);

std::string sha256_hex(const std::string &bytes);
std::string utc_timestamp();

// `<output>.manifest.json`, written atomically.
std::filesystem::path manifest_path(const std::filesystem::path &output);
void write_manifest(const std::filesystem::path &output, const RunManifest &m);

}  // namespace etfp::cli

#endif  // ETFP_CLI_MANIFEST_HPP_
