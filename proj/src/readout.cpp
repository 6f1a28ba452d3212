#include "delayrc/readout.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <numeric>
#include <stdexcept>

namespace delayrc {

long delay_spec::effective_dimension() const {
    return std::accumulate(lags.begin(), lags.end(), 0L);
}

long delay_spec::max_lag() const {
    return lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
}

long delay_spec::history_steps() const { return (max_lag() - 1) * stride; }

delay_spec delay_spec::uniform(long neurons, long n_lag, long stride) {
    delay_spec spec;
    spec.stride = stride;
    spec.lags.assign(neurons, n_lag);
    return spec;
}

void delay_spec::validate() const {
    if (stride < 1) throw std::invalid_argument("delay_spec: stride must be >= 1");
    if (lags.empty()) throw std::invalid_argument("delay_spec: lags must be non-empty");
    for (long d : lags)
        if (d < 1) throw std::invalid_argument("delay_spec: every lag count must be >= 1");
}

feature_block assemble_delayed_features(const state_sequence& states, const delay_spec& spec) {
    spec.validate();
    const long q = states.states.rows();
    const long T = states.states.cols();
    if (q != static_cast<long>(spec.lags.size()))
        throw std::invalid_argument(
            fmt::format("assemble_delayed_features: {} neurons but {} lag counts", q,
                        spec.lags.size()));

    const long first = std::max(states.washout, spec.history_steps());
    if (first >= T)
        throw std::invalid_argument(fmt::format(
            "assemble_delayed_features: need more than {} steps for washout {} and history "
            "{} but only {} are available",
            first, states.washout, spec.history_steps(), T));

    const long d = spec.effective_dimension();
    const long n_valid = T - first;

    feature_block block;
    block.first = first;
    block.features.resize(d, n_valid);
    long row = 0;
    for (long i = 0; i < q; ++i) {
        for (long j = 0; j < spec.lags[i]; ++j) {
            const long lag = j * spec.stride;
            for (long c = 0; c < n_valid; ++c)
                block.features(row, c) = states.states(i, first + c - lag);
            ++row;
        }
    }
    return block;
}

ridge_solution train_ridge(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                           double beta) {
    const long d = features.rows();
    const long T = features.cols();
    if (T < 1) throw std::invalid_argument("train_ridge: need at least one sample");
    if (targets.cols() != T)
        throw std::invalid_argument(fmt::format(
            "train_ridge: features have {} columns but targets have {}", T, targets.cols()));
    if (!features.allFinite() || !targets.allFinite())
        throw std::invalid_argument("train_ridge: non-finite training data");
    if (beta < 0) throw std::invalid_argument("train_ridge: beta must be >= 0");

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
    gram.triangularView<Eigen::Upper>() = gram.transpose();
    gram.diagonal().array() += beta;
    Eigen::MatrixXd cross = targets * features.transpose();  // l x d

    ridge_solution sol;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        const auto& diag = ldlt.vectorD();
        const double dmax = diag.maxCoeff(), dmin = diag.minCoeff();
        ok = dmin > 0 && std::isfinite(dmax) && dmax / dmin <= 1e12;
    }
    if (ok) {
        sol.w = ldlt.solve(cross.transpose()).transpose();
        ok = sol.w.allFinite();
    }
    if (!ok) {
        // singular-value solve with relative cutoff 1e-12
        Eigen::BDCSVD<Eigen::MatrixXd> svd(features, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cutoff = sv.size() ? sv(0) * 1e-12 : 0.0;
        Eigen::VectorXd factors(sv.size());
        for (long i = 0; i < sv.size(); ++i) {
            const double s = sv(i);
            factors(i) = s > cutoff ? s / (s * s + beta) : 0.0;
        }
        sol.w = (targets * svd.matrixV()) * factors.asDiagonal() * svd.matrixU().transpose();
        sol.svd_fallback = true;
    }
    return sol;
}

fit_report fit_readout(const reservoir& res, const time_series& train, const delay_spec& spec,
                       double beta, long washout) {
    fit_report report;
    report.model.spec = spec;
    report.model.beta = beta;
    report.model.normalization = fit_normalization(train.values);

    time_series normalized = train;
    normalized.values = report.model.normalization.apply(train.values);

    state_sequence states = drive(res, normalized, washout);
    feature_block block = assemble_delayed_features(states, spec);
    const long T = train.n_steps();
    const long n_cols = T - 1 - block.first;  // feature column k targets x_{k+1}
    if (n_cols < 1)
        throw std::invalid_argument(
            fmt::format("fit_readout: no training columns left after washout/history ({} steps)",
                        T));

    Eigen::MatrixXd feats = block.features.leftCols(n_cols);
    Eigen::MatrixXd targets = normalized.values.middleCols(block.first + 1, n_cols);

    ridge_solution sol = train_ridge(feats, targets, beta);
    report.model.w_out = sol.w;
    report.model.svd_fallback = sol.svd_fallback;
    report.n_train_columns = n_cols;
    report.train_mse = (sol.w * feats - targets).squaredNorm() /
                       static_cast<double>(targets.size());
    return report;
}

time_series predict_open_loop(const readout_model& model, const Eigen::MatrixXd& features,
                              double dt, std::vector<std::string> var_names) {
    if (features.rows() != model.w_out.cols())
        throw std::invalid_argument(
            fmt::format("predict_open_loop: features have {} rows but the model expects {}",
                        features.rows(), model.w_out.cols()));
    time_series out;
    out.dt = dt;
    out.values = model.normalization.invert(model.w_out * features);
    out.var_names = std::move(var_names);
    return out;
}

time_series predict_closed_loop(const reservoir& res, const readout_model& model,
                                const time_series& warmup, long n_steps, long washout) {
    const long m = res.config.neurons;
    const long l = model.w_out.rows();
    if (l != res.config.input_dim)
        throw std::invalid_argument(fmt::format(
            "predict_closed_loop: model outputs {} variables but the reservoir input expects {}",
            l, res.config.input_dim));
    model.spec.validate();
    if (static_cast<long>(model.spec.lags.size()) != m)
        throw std::invalid_argument("predict_closed_loop: delay spec does not match reservoir");

    const long hist = model.spec.history_steps();
    const long min_warmup = washout + hist + 1;
    if (warmup.n_steps() < min_warmup)
        throw std::invalid_argument(fmt::format(
            "predict_closed_loop: warmup of {} steps is too short; need at least {} "
            "(washout {} + history {} + 1)",
            warmup.n_steps(), min_warmup, washout, hist));

    time_series normalized = warmup;
    normalized.values = model.normalization.apply(warmup.values);
    state_sequence warm_states = drive(res, normalized, washout);

    // ring buffer of the last hist+1 states; slot(t mod size) holds state t
    const long buf_len = hist + 1;
    Eigen::MatrixXd ring(m, buf_len);
    long now = warmup.n_steps() - 1;  // time index of the newest state
    for (long b = 0; b < buf_len; ++b) {
        const long t = now - hist + b;
        ring.col(t % buf_len) = warm_states.states.col(t);
    }

    const long d = model.spec.effective_dimension();
    Eigen::VectorXd feat(d);
    Eigen::VectorXd y(l);
    Eigen::VectorXd r = warm_states.states.col(now);
    Eigen::VectorXd pre(m);
    const double alpha = res.config.leak;

    time_series out;
    out.dt = warmup.dt;
    out.var_names = warmup.var_names;
    out.values.resize(l, n_steps);

    for (long step = 0; step < n_steps; ++step) {
        long row = 0;
        for (long i = 0; i < m; ++i)
            for (long j = 0; j < model.spec.lags[i]; ++j) {
                const long t = now - j * model.spec.stride;
                feat(row++) = ring(i, t % buf_len);
            }
        y.noalias() = model.w_out * feat;
        out.values.col(step) = y;

        pre.noalias() = res.w_res * r;
        pre.noalias() += res.w_in * y;
        r = (1.0 - alpha) * r + alpha * pre.array().tanh().matrix();
        ++now;
        ring.col(now % buf_len) = r;
    }
    out.values = model.normalization.invert(out.values);
    return out;
}

}  // namespace delayrc
