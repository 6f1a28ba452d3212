#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>

namespace delayrc {

struct run_options {
    std::string out_dir = "out";
    int jobs = 1;
};

/// Fills in every default for the given command, validates keys and value
/// shapes, and returns the fully expanded config that the manifest records.
/// Resolving an already-resolved config is a no-op.
nlohmann::json resolve_config(const std::string& command, nlohmann::json user);

/// Executes one CLI command against a resolved config. Writes the command's
/// artifacts plus manifest.json into out_dir; returns the manifest.
nlohmann::json run_command(const std::string& command, const nlohmann::json& resolved,
                           const run_options& options);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string file_digest(const std::string& path);

}  // namespace delayrc
