#pragma once

#include "delayrc/presets.hpp"
#include "delayrc/readout.hpp"
#include "delayrc/reservoir.hpp"
#include "delayrc/time_series.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace delayrc {

/// Mean squared error over all variables and steps, computed on normalized
/// variables (zero-mean unit-variance transform fitted on the truth).
double mse(const time_series& pred, const time_series& truth);

/// First step where ||pred - truth|| / rms(truth) exceeds the threshold,
/// converted to Lyapunov times; the full horizon if never exceeded.
double valid_prediction_time(const time_series& pred, const time_series& truth,
                             double threshold, double lyapunov_time);

/// Climate surrogate for "reconstructed dynamics" judgments: the autonomous
/// run must stay within bound_factor of the truth's per-variable range and
/// every per-variable histogram must be within tv_threshold total-variation
/// distance of the truth's.
struct climate_report {
    bool pass = false;
    bool bounded = false;
    double max_tv = 0.0;
    std::vector<double> tv_per_var;
};

climate_report climate_test(const time_series& autonomous, const time_series& truth,
                            int bins = 30, double bound_factor = 1.5,
                            double tv_threshold = 0.2);

// ---------------------------------------------------------------------------

struct mc_result {
    std::vector<double> mc_k;  // index i holds MC at delay k = i+1
    double total = 0.0;
    long neurons = 0;
    long n_lag = 0;
    long stride = 1;
    double beta = 0.0;
    std::uint64_t seed = 0;
};

struct mc_options {
    long n_train = 4000;
    long n_test = 1000;
    double amplitude = 0.5;
    long washout = default_washout;
};

/// Memory capacity: drives the reservoir with a random input sequence, trains
/// one ridge readout per delay k to recall x(t-k) from the delayed features,
/// and evaluates the squared correlation on a held-out continuation of the
/// same drive. A zero-variance readout scores 0.
mc_result memory_capacity(const reservoir& res, const delay_spec& spec, long k_max, double beta,
                          std::uint64_t seed, const mc_options& opt = {});

// ---------------------------------------------------------------------------

struct sweep_cell {
    long neurons = 0;
    long n_lag = 0;
    std::vector<double> mses;          // one per repeat; NaN where failed
    std::vector<std::string> status;   // "ok" or the failure reason
    double median_mse() const;
};

struct sweep_result {
    std::vector<long> neuron_list;
    std::vector<long> lag_list;
    long stride = 1;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int repeats = 1;
    std::vector<sweep_cell> cells;  // row-major over (neuron, lag)

    const sweep_cell& cell(long i_neuron, long i_lag) const;
};

/// Training-MSE grid over neuron count x lag count at fixed stride. All cells
/// share the trajectory; reservoir seeds derive from (seed, neuron index,
/// repeat) so enlarging the lag count keeps the feature sets nested.
sweep_result tradeoff_grid(const system_preset& system, const std::vector<long>& neuron_list,
                           const std::vector<long>& lag_list, long tau, double beta, int repeats,
                           std::uint64_t seed, int jobs = 1, long n_train = 6000);

// ---------------------------------------------------------------------------

enum class dim_builder { no_delay, single_neuron, fixed_neurons };

struct dim_policy {
    dim_builder kind = dim_builder::no_delay;
    long neurons = 1;  // used by fixed_neurons
    long stride = 1;
};

struct dimension_entry {
    long d = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    bool ok = false;
    std::string status;
};

struct dimension_report {
    std::vector<dimension_entry> rows;  // medians over repeats
    long recommended = 0;
};

/// Evaluates train/validation MSE against the effective dimension and
/// recommends the smallest d whose validation improvement over the previous
/// entry falls below 5% (80/20 chronological split).
dimension_report dimension_test(const system_preset& system, const std::vector<long>& d_list,
                                const dim_policy& policy, double beta, int repeats,
                                std::uint64_t seed, long n_train = 6000, int jobs = 1);

/// Split + elbow core, exposed for direct evaluation of prepared features.
struct dimension_sample {
    long d = 0;
    Eigen::MatrixXd features;
    Eigen::MatrixXd targets;
};
dimension_entry evaluate_dimension_sample(const dimension_sample& sample, double beta,
                                          double split_fraction = 0.8);
long recommend_dimension(const std::vector<dimension_entry>& rows,
                         double improvement_threshold = 0.05);

// ---------------------------------------------------------------------------

struct dmi_result {
    std::vector<double> dmi;   // index i holds DMI at lag tau = i+1, in bits
    std::vector<double> bias;  // finite-sample bias estimate per lag
    long recommended_tau = 0;
};

/// Histogram mutual information I(x_t; x_{t-tau}) per lag, averaged across
/// the rows of the series. Recommended tau is the first strict local minimum
/// of the averaged curve, or the first lag below 1/e of the lag-1 value.
dmi_result delayed_mutual_information(const time_series& series, long tau_max, int bins);

// ---------------------------------------------------------------------------

struct budget_report {
    bool pass = false;
    double margin = 0.0;  // (tau * dt * n_lag) / lyapunov_time
};

/// Checks the lag-budget constraint tau * dt * n_lag < lyapunov_time.
budget_report lag_budget_check(long tau, double dt, long n_lag, double lyapunov_time);

}  // namespace delayrc
