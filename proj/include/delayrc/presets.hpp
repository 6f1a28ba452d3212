#pragma once

#include "delayrc/dynamics.hpp"

#include <string>
#include <variant>
#include <vector>

namespace delayrc {

/// Named ground-truth system. Figure-scale experiment settings live in the
/// config files under configs/; these presets fix the dynamics only.
struct system_preset {
    std::string name;
    std::variant<lorenz_params, gene_model_params, lattice_params> params;

    long dim() const;
    double dt() const;
    time_series generate() const;
    time_series generate(long n_steps, long extra_discard = 0) const;
    lyapunov_result lyapunov(double horizon) const;
};

system_preset get_system_preset(const std::string& name);
std::vector<std::string> list_system_presets();

}  // namespace delayrc
