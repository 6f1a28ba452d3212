#include "delayrc/presets.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace delayrc {

long system_preset::dim() const {
    return std::visit(
        [](const auto& p) -> long {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, lorenz_params>) return 3;
            if constexpr (std::is_same_v<T, gene_model_params>) return 1;
            if constexpr (std::is_same_v<T, lattice_params>) return p.height * p.width;
        },
        params);
}

double system_preset::dt() const {
    return std::visit([](const auto& p) { return p.dt; }, params);
}

time_series system_preset::generate() const {
    return std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, lorenz_params>)
                return generate_lorenz(p);
            else if constexpr (std::is_same_v<T, gene_model_params>)
                return generate_gene_model(p);
            else
                return generate_lattice(p);
        },
        params);
}

time_series system_preset::generate(long n_steps, long extra_discard) const {
    return std::visit(
        [&](auto p) {
            p.n_steps = n_steps;
            p.n_discard += extra_discard;
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, lorenz_params>)
                return generate_lorenz(p);
            else if constexpr (std::is_same_v<std::decay_t<decltype(p)>, gene_model_params>)
                return generate_gene_model(p);
            else
                return generate_lattice(p);
        },
        params);
}

lyapunov_result system_preset::lyapunov(double horizon) const {
    return std::visit(
        [&](const auto& p) { return estimate_lyapunov(*make_lyapunov_system(p), horizon); },
        params);
}

system_preset get_system_preset(const std::string& name) {
    if (name == "lorenz") {
        lorenz_params p;  // classic chaotic benchmark settings
        return {name, p};
    }
    if (name == "gene-chaotic") {
        // Preset found by a Lyapunov-exponent parameter search over the Hill
        // feedback gains and delays; see configs/fig3a.cfg for the experiment.
        gene_model_params p;
        p.k_decay = 1.0;
        p.g_gain = 4.0;
        p.theta1 = 1.0;
        p.hill1 = 4.0;
        p.theta2 = 1.0;
        p.hill2 = 2.0;
        p.tau1 = 5.0;
        p.tau2 = 10.0;
        p.history_value = 0.5;
        p.dt = 0.1;
        p.n_steps = 6000;
        p.n_discard = 5000;
        return {name, p};
    }
    if (name == "gene-decay") {
        gene_model_params p;
        p.g_gain = 0.0;
        p.n_discard = 0;
        return {name, p};
    }
    if (name == "lattice20") {
        lattice_params p;
        p.height = 20;
        p.width = 20;
        p.coupling = 0.3;
        p.map_param = 3.9;
        p.n_steps = 3000;
        p.n_discard = 200;
        return {name, p};
    }
    throw std::invalid_argument(fmt::format("unknown system preset '{}'; available: {}", name,
                                            fmt::join(list_system_presets(), ", ")));
}

std::vector<std::string> list_system_presets() {
    return {"lorenz", "gene-chaotic", "gene-decay", "lattice20"};
}

}  // namespace delayrc
