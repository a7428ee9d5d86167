#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace kroncov {

inline constexpr const char* kSchemaVersion = "kroncov/1";
inline constexpr const char* kArtifactVersion = "kroncov 0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

// Provenance block embedded in every CLI output: what ran, with which
// resolved configuration and seed, on which input bytes, when.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    bool seed_from_entropy = false;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::string created_at;  // ISO 8601 UTC

    nlohmann::json to_json() const;
};

RunManifest make_manifest(const std::string& command, nlohmann::json config, std::uint64_t seed,
                          bool seed_from_entropy, const std::vector<std::string>& input_paths);

}  // namespace kroncov
