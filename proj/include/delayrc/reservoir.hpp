#pragma once

#include "delayrc/time_series.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

namespace delayrc {

struct reservoir_config {
    long neurons = 200;          // m, >= 1 (single-neuron reservoirs allowed)
    long input_dim = 1;          // n_in
    double spectral_radius = 0.9;
    double input_scale = 0.1;
    double density = 0.05;       // fraction of nonzero recurrent entries, (0,1]
    double leak = 1.0;           // alpha in (0,1]
    std::uint64_t seed = 1;
};

/// Fixed random layers. Immutable after construction.
struct reservoir {
    Eigen::MatrixXd w_in;               // m x n_in
    Eigen::SparseMatrix<double> w_res;  // m x m
    reservoir_config config;
    double achieved_spectral_radius = 0.0;
};

/// W_in entries i.i.d. uniform [-input_scale, input_scale]; W_res sampled
/// Erdos-Renyi at the given density with uniform [-1,1] nonzeros, then
/// rescaled to the requested spectral radius. Deterministic in seed.
reservoir build_reservoir(const reservoir_config& config);

/// Spectral radius of a sparse real matrix: dense eigensolve up to 512 rows,
/// power iteration with a two-vector recurrence fit (handles complex dominant
/// pairs) above that.
double spectral_radius(const Eigen::SparseMatrix<double>& m);

struct state_sequence {
    Eigen::MatrixXd states;  // m x n_steps, column k holds r_{k+1}
    long washout = 0;        // transient prefix, excluded from training
};

inline constexpr long default_washout = 500;

/// Evolves r_k = (1-alpha) r_{k-1} + alpha tanh(W_res r_{k-1} + W_in x_k)
/// with r_0 given; column k of the result corresponds to input column k.
state_sequence drive(const reservoir& res, const time_series& inputs,
                     const Eigen::VectorXd& r0, long washout = default_washout);

/// drive() from the all-zero initial state.
state_sequence drive(const reservoir& res, const time_series& inputs,
                     long washout = default_washout);

struct echo_state_report {
    bool pass = false;
    std::vector<double> decay;  // max pairwise state distance per step
};

/// Drives the same input from `trials` random initial states and checks that
/// they have collapsed below tol by the final step.
echo_state_report echo_state_check(const reservoir& res, const time_series& inputs,
                                   int trials, double tol, std::uint64_t seed = 99);

}  // namespace delayrc
