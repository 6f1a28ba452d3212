#pragma once

#include "delayrc/readout.hpp"
#include "delayrc/reservoir.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace delayrc {

// Textual serialization of the trained pair. Matrices are stored explicitly
// by default so a saved (reservoir, model) pair replays predictions exactly
// even if the sampling code changes; without matrices the reservoir is
// rebuilt deterministically from its config and seed.

nlohmann::json reservoir_to_json(const reservoir& res, bool include_matrices = true);
reservoir reservoir_from_json(const nlohmann::json& j);
void save_reservoir(const reservoir& res, const std::string& path, bool include_matrices = true);
reservoir load_reservoir(const std::string& path);

nlohmann::json readout_to_json(const readout_model& model);
readout_model readout_from_json(const nlohmann::json& j);
void save_readout(const readout_model& model, const std::string& path);
readout_model load_readout(const std::string& path);

}  // namespace delayrc
