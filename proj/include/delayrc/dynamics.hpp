#pragma once

#include "delayrc/time_series.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace delayrc {

struct lorenz_params {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    std::array<double, 3> x0{1.0, 1.0, 1.0};
    double dt = 0.01;
    long n_steps = 6000;
    long n_discard = 5000;
};

/// Classical fixed-step RK4 integration of the Lorenz system. Sample i is the
/// state at time (n_discard + i) * dt, counting from x0 at time 0.
time_series generate_lorenz(const lorenz_params& params);

/// One-dimensional gene regulation model with two delayed feedback terms,
///   x'(t) = -k x(t) + g * f1(x(t - tau1)) * f2(x(t - tau2)),
/// f1 a decreasing Hill term (self-inhibition), f2 an increasing one
/// (self-activation). dt must divide both delays so the method-of-steps grid
/// lines up with the delayed reads.
struct gene_model_params {
    double k_decay = 1.0;
    double g_gain = 4.0;
    double theta1 = 1.0;
    double hill1 = 4.0;
    double theta2 = 1.0;
    double hill2 = 2.0;
    double tau1 = 5.0;
    double tau2 = 10.0;
    double history_value = 0.5;
    /// Optional history x(t) on [-max(tau1,tau2), 0]; overrides history_value.
    std::function<double(double)> history;
    /// Domain of the supplied history function (only checked when set).
    double history_span = std::numeric_limits<double>::infinity();
    double dt = 0.1;
    long n_steps = 6000;
    long n_discard = 5000;
};

time_series generate_gene_model(const gene_model_params& params);

enum class lattice_map { logistic, identity };

/// Coupled map lattice: 4-neighbour diffusive coupling with periodic
/// boundaries on an H x W grid, cells flattened row-major.
struct lattice_params {
    long height = 20;
    long width = 20;
    double coupling = 0.3;
    lattice_map map = lattice_map::logistic;
    double map_param = 3.9;
    double dt = 1.0;
    long n_steps = 1000;
    long n_discard = 100;
    std::uint64_t seed = 1;
};

time_series generate_lattice(const lattice_params& params);

/// I.i.d. uniform values on [-amplitude, amplitude], deterministic in seed.
time_series random_input_sequence(std::uint64_t seed, long n_steps, double amplitude);

// ---------------------------------------------------------------------------
// Largest Lyapunov exponent, Benettin two-trajectory renormalization.

/// A system evolved step by step for the Benettin estimator. For delay
/// systems the state carries the full history segment.
class lyapunov_system {
public:
    virtual ~lyapunov_system() = default;
    virtual double dt() const = 0;
    /// State on the attractor after the system's own transient.
    virtual std::vector<double> initial_state() const = 0;
    virtual void advance(std::vector<double>& state) const = 0;
};

std::unique_ptr<lyapunov_system> make_lyapunov_system(const lorenz_params& params);
std::unique_ptr<lyapunov_system> make_lyapunov_system(const gene_model_params& params);
std::unique_ptr<lyapunov_system> make_lyapunov_system(const lattice_params& params);
std::unique_ptr<lyapunov_system> make_linear_decay_system(double rate, double dt);
std::unique_ptr<lyapunov_system> make_logistic_map_system(double a);

struct lyapunov_result {
    double lambda = 0.0;         // per unit time
    double lyapunov_time = std::numeric_limits<double>::infinity();
    bool chaotic = false;        // lambda > 0
};

struct lyapunov_options {
    double separation = 1e-9;
    long renorm_every = 5;
    std::uint64_t seed = 12345;
};

/// Runs two trajectories separated by opt.separation over the given horizon
/// (in time units), renormalizing every renorm_every steps. A non-positive
/// exponent is reported as-is with chaotic = false.
lyapunov_result estimate_lyapunov(const lyapunov_system& sys, double horizon,
                                  const lyapunov_options& opt = {});

}  // namespace delayrc
