#pragma once

// Run manifests: enough metadata next to every output set to reproduce the
// run (subcommand, effective config, seed, tool version).

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ridcov {

struct RunManifest {
    std::string subcommand;
    nlohmann::json config = nlohmann::json::object(); // effective settings
    std::uint64_t master_seed = 0;
    std::string tool_version;
    std::vector<std::string> output_paths;
    double duration_seconds = 0.0;
};

nlohmann::json to_json(const RunManifest& manifest);

// Writes content to a temporary sibling file and renames it into place, so a
// crash never leaves a partial file at `path`.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

} // namespace ridcov
