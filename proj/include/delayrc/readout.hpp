#pragma once

#include "delayrc/reservoir.hpp"
#include "delayrc/time_series.hpp"

#include <Eigen/Dense>

#include <vector>

namespace delayrc {

/// Layout of the delayed readout vector: each neuron i contributes its
/// current value plus lags[i]-1 past values strided by `stride` steps.
/// All-ones lags degenerate to the standard non-delayed readout.
struct delay_spec {
    long stride = 1;              // tau, in steps
    std::vector<long> lags;      // d_i, one per neuron

    long effective_dimension() const;          // d = sum d_i
    long max_lag() const;                      // max d_i
    long history_steps() const;                // (max d_i - 1) * stride

    static delay_spec uniform(long neurons, long n_lag, long stride = 1);

    void validate() const;
};

struct feature_block {
    Eigen::MatrixXd features;  // d x n_valid
    long first = 0;            // state/time index of column 0
};

/// Column for time k stacks, neuron-major and recency-first,
/// [r_{1,k}, r_{1,k-tau}, ..., r_{1,k-(d1-1)tau}, ..., r_{q,k}, ...].
/// Valid columns start at max(washout, (max d_i - 1) * tau).
feature_block assemble_delayed_features(const state_sequence& states, const delay_spec& spec);

struct ridge_solution {
    Eigen::MatrixXd w;  // l x d
    bool svd_fallback = false;
};

/// W = Y R^T (R R^T + beta I)^-1 via LDLT; falls back to a singular-value
/// solve (relative cutoff 1e-12) when the factorization's condition estimate
/// exceeds 1e12. Columns of features/targets must already be aligned.
ridge_solution train_ridge(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                           double beta);

struct readout_model {
    Eigen::MatrixXd w_out;           // l x d
    delay_spec spec;
    double beta = 0.0;
    affine_transform normalization;  // applied to inputs before the reservoir
    bool svd_fallback = false;
};

struct fit_report {
    readout_model model;
    double train_mse = 0.0;  // on normalized variables
    long n_train_columns = 0;
};

/// One-step-ahead training pipeline: fit the input normalization on the
/// training series, drive the reservoir from the zero state, assemble the
/// delayed features and regress column k onto the normalized x_{k+1}.
fit_report fit_readout(const reservoir& res, const time_series& train, const delay_spec& spec,
                       double beta, long washout = default_washout);

/// Teacher-forced prediction: y_k = W_out r~_k, de-normalized.
time_series predict_open_loop(const readout_model& model, const Eigen::MatrixXd& features,
                              double dt, std::vector<std::string> var_names = {});

/// Autonomous prediction: drives the reservoir with the (normalized) warmup
/// data, then feeds each output back as the next input. Output column j is
/// the prediction for warmup step n_warmup + j.
time_series predict_closed_loop(const reservoir& res, const readout_model& model,
                                const time_series& warmup, long n_steps,
                                long washout = default_washout);

}  // namespace delayrc
