#include "delayrc/analysis.hpp"

#include "delayrc/parallel.hpp"
#include "delayrc/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace delayrc {

namespace {

void require_same_shape(const time_series& a, const time_series& b, const char* what) {
    if (a.n_vars() != b.n_vars() || a.n_steps() != b.n_steps())
        throw std::invalid_argument(fmt::format("{}: shape mismatch ({}x{} vs {}x{})", what,
                                                a.n_vars(), a.n_steps(), b.n_vars(), b.n_steps()));
}

double median_of(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Squared Pearson correlation with the zero-variance convention.
double squared_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const long n = x.size();
    const double mx = x.mean(), my = y.mean();
    double cov = 0, vx = 0, vy = 0;
    for (long i = 0; i < n; ++i) {
        const double a = x[i] - mx, b = y[i] - my;
        cov += a * b;
        vx += a * a;
        vy += b * b;
    }
    if (vx <= 0 || vy <= 0) return 0.0;
    return (cov * cov) / (vx * vy);
}

// Ridge normal-equation factorization reusable across many target rows.
struct ridge_factor {
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    Eigen::BDCSVD<Eigen::MatrixXd> svd;
    Eigen::VectorXd svd_factors;
    bool use_svd = false;
    double beta = 0.0;

    ridge_factor(const Eigen::MatrixXd& features, double beta_) : beta(beta_) {
        const long d = features.rows();
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
        gram.triangularView<Eigen::Upper>() = gram.transpose();
        gram.diagonal().array() += beta;
        ldlt.compute(gram);
        bool ok = ldlt.info() == Eigen::Success;
        if (ok) {
            const auto& diag = ldlt.vectorD();
            ok = diag.minCoeff() > 0 && diag.maxCoeff() / diag.minCoeff() <= 1e12;
        }
        if (!ok) {
            use_svd = true;
            svd.compute(features, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            const double cutoff = sv.size() ? sv(0) * 1e-12 : 0.0;
            svd_factors.resize(sv.size());
            for (long i = 0; i < sv.size(); ++i)
                svd_factors(i) = sv(i) > cutoff ? sv(i) / (sv(i) * sv(i) + beta) : 0.0;
        }
    }

    // W = targets F^T (F F^T + beta I)^-1 for row-major targets
    Eigen::MatrixXd solve(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& features) const {
        if (use_svd)
            return (targets * svd.matrixV()) * svd_factors.asDiagonal() * svd.matrixU().transpose();
        return ldlt.solve(features * targets.transpose()).transpose();
    }
};

}  // namespace

double mse(const time_series& pred, const time_series& truth) {
    require_same_shape(pred, truth, "mse");
    const affine_transform norm = fit_normalization(truth.values);
    const Eigen::MatrixXd diff = norm.apply(pred.values) - norm.apply(truth.values);
    return diff.squaredNorm() / static_cast<double>(diff.size());
}

double valid_prediction_time(const time_series& pred, const time_series& truth,
                             double threshold, double lyapunov_time) {
    require_same_shape(pred, truth, "valid_prediction_time");
    if (lyapunov_time <= 0)
        throw std::invalid_argument("valid_prediction_time: lyapunov_time must be positive");
    if (threshold <= 0)
        throw std::invalid_argument("valid_prediction_time: threshold must be positive");

    const long T = truth.n_steps();
    const double rms = std::sqrt(truth.values.squaredNorm() / static_cast<double>(T));
    for (long t = 0; t < T; ++t) {
        const double err = (pred.values.col(t) - truth.values.col(t)).norm();
        if (err > threshold * rms)
            return static_cast<double>(t) * truth.dt / lyapunov_time;
    }
    return static_cast<double>(T) * truth.dt / lyapunov_time;
}

climate_report climate_test(const time_series& autonomous, const time_series& truth, int bins,
                            double bound_factor, double tv_threshold) {
    if (autonomous.n_vars() != truth.n_vars())
        throw std::invalid_argument("climate_test: variable count mismatch");
    if (bins < 2) throw std::invalid_argument("climate_test: bins must be >= 2");

    climate_report report;
    report.bounded = true;
    report.tv_per_var.resize(truth.n_vars());
    for (long v = 0; v < truth.n_vars(); ++v) {
        const double lo = truth.values.row(v).minCoeff();
        const double hi = truth.values.row(v).maxCoeff();
        const double center = 0.5 * (lo + hi);
        const double half = std::max(0.5 * (hi - lo), 1e-12);

        const auto auto_row = autonomous.values.row(v);
        if ((auto_row.array() - center).abs().maxCoeff() > bound_factor * half)
            report.bounded = false;

        std::vector<double> p(bins, 0.0), q(bins, 0.0);
        const auto bin_of = [&](double x) {
            const long b = static_cast<long>((x - lo) / (hi - lo + 1e-300) * bins);
            return std::clamp<long>(b, 0, bins - 1);
        };
        for (long t = 0; t < truth.n_steps(); ++t) p[bin_of(truth.values(v, t))] += 1.0;
        for (long t = 0; t < autonomous.n_steps(); ++t) q[bin_of(autonomous.values(v, t))] += 1.0;
        double tv = 0;
        for (int b = 0; b < bins; ++b)
            tv += std::abs(p[b] / truth.n_steps() - q[b] / autonomous.n_steps());
        report.tv_per_var[v] = 0.5 * tv;
    }
    report.max_tv = *std::max_element(report.tv_per_var.begin(), report.tv_per_var.end());
    report.pass = report.bounded && report.max_tv < tv_threshold;
    return report;
}

mc_result memory_capacity(const reservoir& res, const delay_spec& spec, long k_max, double beta,
                          std::uint64_t seed, const mc_options& opt) {
    if (k_max < 1) throw std::invalid_argument("memory_capacity: k_max must be >= 1");
    if (opt.n_train < 1 || opt.n_test < 2)
        throw std::invalid_argument("memory_capacity: need n_train >= 1 and n_test >= 2");
    spec.validate();

    const long t0 = std::max({opt.washout, spec.history_steps(), k_max});
    const long total = t0 + opt.n_train + opt.n_test;
    const time_series input =
        random_input_sequence(derive_seed(seed, "mc-input"), total, opt.amplitude);

    state_sequence states = drive(res, input, opt.washout);
    feature_block block = assemble_delayed_features(states, spec);
    // column for time t sits at t - block.first
    const Eigen::MatrixXd train_feats =
        block.features.middleCols(t0 - block.first, opt.n_train);
    const Eigen::MatrixXd test_feats =
        block.features.middleCols(t0 + opt.n_train - block.first, opt.n_test);

    ridge_factor factor(train_feats, beta);

    mc_result result;
    result.mc_k.resize(k_max);
    result.neurons = res.config.neurons;
    result.n_lag = spec.max_lag();
    result.stride = spec.stride;
    result.beta = beta;
    result.seed = seed;

    Eigen::MatrixXd target(1, opt.n_train);
    for (long k = 1; k <= k_max; ++k) {
        for (long c = 0; c < opt.n_train; ++c) target(0, c) = input.values(0, t0 + c - k);
        const Eigen::MatrixXd w = factor.solve(target, train_feats);

        Eigen::VectorXd predicted = (w * test_feats).row(0);
        Eigen::VectorXd actual(opt.n_test);
        for (long c = 0; c < opt.n_test; ++c) actual[c] = input.values(0, t0 + opt.n_train + c - k);
        result.mc_k[k - 1] = squared_correlation(actual, predicted);
    }
    result.total = std::accumulate(result.mc_k.begin(), result.mc_k.end(), 0.0);
    return result;
}

double sweep_cell::median_mse() const { return median_of(mses); }

const sweep_cell& sweep_result::cell(long i_neuron, long i_lag) const {
    return cells.at(i_neuron * static_cast<long>(lag_list.size()) + i_lag);
}

sweep_result tradeoff_grid(const system_preset& system, const std::vector<long>& neuron_list,
                           const std::vector<long>& lag_list, long tau, double beta, int repeats,
                           std::uint64_t seed, int jobs, long n_train) {
    if (neuron_list.empty() || lag_list.empty())
        throw std::invalid_argument("tradeoff_grid: neuron and lag lists must be non-empty");
    if (repeats < 1) throw std::invalid_argument("tradeoff_grid: repeats must be >= 1");

    const time_series trajectory = system.generate(n_train);

    sweep_result result;
    result.neuron_list = neuron_list;
    result.lag_list = lag_list;
    result.stride = tau;
    result.beta = beta;
    result.seed = seed;
    result.repeats = repeats;
    result.cells.resize(neuron_list.size() * lag_list.size());
    for (std::size_t i = 0; i < neuron_list.size(); ++i)
        for (std::size_t j = 0; j < lag_list.size(); ++j) {
            sweep_cell& cell = result.cells[i * lag_list.size() + j];
            cell.neurons = neuron_list[i];
            cell.n_lag = lag_list[j];
            cell.mses.assign(repeats, std::numeric_limits<double>::quiet_NaN());
            cell.status.assign(repeats, "pending");
        }

    const long n_tasks = static_cast<long>(result.cells.size()) * repeats;
    parallel_for(n_tasks, jobs, [&](long task) {
        const long cell_index = task / repeats;
        const int rep = static_cast<int>(task % repeats);
        sweep_cell& cell = result.cells[cell_index];
        const long i_neuron = cell_index / static_cast<long>(lag_list.size());
        try {
            reservoir_config cfg;
            cfg.neurons = cell.neurons;
            cfg.input_dim = system.dim();
            cfg.seed = derive_seed(seed, "sweep-reservoir",
                                   {static_cast<std::uint64_t>(i_neuron),
                                    static_cast<std::uint64_t>(rep)});
            const reservoir res = build_reservoir(cfg);
            const delay_spec spec = delay_spec::uniform(cell.neurons, cell.n_lag, tau);
            const fit_report fit = fit_readout(res, trajectory, spec, beta);
            cell.mses[rep] = fit.train_mse;
            cell.status[rep] = "ok";
        } catch (const std::exception& e) {
            cell.status[rep] = e.what();
        }
    });
    return result;
}

dimension_entry evaluate_dimension_sample(const dimension_sample& sample, double beta,
                                          double split_fraction) {
    const long T = sample.features.cols();
    const long n_train = static_cast<long>(std::floor(split_fraction * static_cast<double>(T)));
    if (n_train < 1 || n_train >= T)
        throw std::invalid_argument(
            fmt::format("evaluate_dimension_sample: split {}/{} leaves an empty part", n_train,
                        T - n_train));

    const Eigen::MatrixXd train_f = sample.features.leftCols(n_train);
    const Eigen::MatrixXd train_y = sample.targets.leftCols(n_train);
    const Eigen::MatrixXd val_f = sample.features.rightCols(T - n_train);
    const Eigen::MatrixXd val_y = sample.targets.rightCols(T - n_train);

    const ridge_solution sol = train_ridge(train_f, train_y, beta);
    dimension_entry entry;
    entry.d = sample.d;
    entry.train_mse =
        (sol.w * train_f - train_y).squaredNorm() / static_cast<double>(train_y.size());
    entry.val_mse = (sol.w * val_f - val_y).squaredNorm() / static_cast<double>(val_y.size());
    entry.ok = true;
    entry.status = "ok";
    return entry;
}

long recommend_dimension(const std::vector<dimension_entry>& rows, double improvement_threshold) {
    const dimension_entry* prev = nullptr;
    for (const auto& row : rows) {
        if (!row.ok) continue;
        if (prev && (prev->val_mse - row.val_mse) <= improvement_threshold * prev->val_mse)
            return row.d;
        prev = &row;
    }
    return prev ? prev->d : 0;
}

namespace {

delay_spec spec_for_dimension(const dim_policy& policy, long d) {
    delay_spec spec;
    spec.stride = policy.stride;
    switch (policy.kind) {
        case dim_builder::no_delay:
            spec.lags.assign(d, 1);
            break;
        case dim_builder::single_neuron:
            spec.lags.assign(1, d);
            break;
        case dim_builder::fixed_neurons: {
            const long q = policy.neurons;
            if (d < q)
                throw std::invalid_argument(fmt::format(
                    "dimension_test: d={} smaller than the fixed neuron count {}", d, q));
            spec.lags.assign(q, d / q);
            for (long i = 0; i < d % q; ++i) ++spec.lags[i];
            break;
        }
    }
    return spec;
}

long neurons_for_dimension(const dim_policy& policy, long d) {
    switch (policy.kind) {
        case dim_builder::no_delay: return d;
        case dim_builder::single_neuron: return 1;
        case dim_builder::fixed_neurons: return policy.neurons;
    }
    return d;
}

}  // namespace

dimension_report dimension_test(const system_preset& system, const std::vector<long>& d_list,
                                const dim_policy& policy, double beta, int repeats,
                                std::uint64_t seed, long n_train, int jobs) {
    if (d_list.empty()) throw std::invalid_argument("dimension_test: d_list must be non-empty");
    if (!std::is_sorted(d_list.begin(), d_list.end()))
        throw std::invalid_argument("dimension_test: d_list must be sorted ascending");
    if (repeats < 1) throw std::invalid_argument("dimension_test: repeats must be >= 1");

    const time_series trajectory = system.generate(n_train);

    struct slot {
        dimension_entry entry;
    };
    std::vector<slot> slots(d_list.size() * repeats);

    parallel_for(static_cast<long>(slots.size()), jobs, [&](long task) {
        const std::size_t di = task / repeats;
        const int rep = static_cast<int>(task % repeats);
        dimension_entry& entry = slots[task].entry;
        entry.d = d_list[di];
        try {
            reservoir_config cfg;
            cfg.neurons = neurons_for_dimension(policy, d_list[di]);
            cfg.input_dim = system.dim();
            cfg.seed = derive_seed(seed, "dimtest-reservoir",
                                   {static_cast<std::uint64_t>(di), static_cast<std::uint64_t>(rep)});
            const reservoir res = build_reservoir(cfg);
            const delay_spec spec = spec_for_dimension(policy, d_list[di]);

            const affine_transform norm = fit_normalization(trajectory.values);
            time_series normalized = trajectory;
            normalized.values = norm.apply(trajectory.values);
            const state_sequence states = drive(res, normalized);
            const feature_block block = assemble_delayed_features(states, spec);
            const long usable = trajectory.n_steps() - 1 - block.first;
            if (usable < 5)
                throw std::invalid_argument("dimension_test: too few usable columns");

            dimension_sample sample;
            sample.d = d_list[di];
            sample.features = block.features.leftCols(usable);
            sample.targets = normalized.values.middleCols(block.first + 1, usable);
            entry = evaluate_dimension_sample(sample, beta);
        } catch (const std::exception& e) {
            entry.ok = false;
            entry.status = e.what();
        }
    });

    dimension_report report;
    report.rows.reserve(d_list.size());
    for (std::size_t di = 0; di < d_list.size(); ++di) {
        dimension_entry row;
        row.d = d_list[di];
        std::vector<double> train_mses, val_mses;
        std::string failure;
        for (int rep = 0; rep < repeats; ++rep) {
            const dimension_entry& e = slots[di * repeats + rep].entry;
            if (e.ok) {
                train_mses.push_back(e.train_mse);
                val_mses.push_back(e.val_mse);
            } else {
                failure = e.status;
            }
        }
        row.ok = !val_mses.empty();
        row.status = row.ok ? "ok" : failure;
        row.train_mse = median_of(train_mses);
        row.val_mse = median_of(val_mses);
        report.rows.push_back(row);
    }
    report.recommended = recommend_dimension(report.rows);
    return report;
}

dmi_result delayed_mutual_information(const time_series& series, long tau_max, int bins) {
    if (tau_max < 1) throw std::invalid_argument("delayed_mutual_information: tau_max must be >= 1");
    if (bins < 2) throw std::invalid_argument("delayed_mutual_information: bins must be >= 2");
    const long n = series.n_steps();
    const long needed = tau_max + 50L * bins;
    if (n < needed)
        throw std::invalid_argument(
            fmt::format("delayed_mutual_information: series of {} steps is too short; each lag "
                        "estimate needs at least {} samples ({} steps total)",
                        n, 50L * bins, needed));

    dmi_result result;
    result.dmi.assign(tau_max, 0.0);
    result.bias.resize(tau_max);
    for (long tau = 1; tau <= tau_max; ++tau) {
        const double N = static_cast<double>(n - tau);
        result.bias[tau - 1] =
            static_cast<double>((bins - 1) * (bins - 1)) / (2.0 * N * std::numbers::ln2);
    }

    for (long v = 0; v < series.n_vars(); ++v) {
        const auto row = series.values.row(v);
        const double lo = row.minCoeff(), hi = row.maxCoeff();
        if (hi <= lo) continue;  // constant trace carries no information
        const auto bin_of = [&](double x) {
            const long b = static_cast<long>((x - lo) / (hi - lo) * bins);
            return std::clamp<long>(b, 0, bins - 1);
        };
        std::vector<long> binned(n);
        for (long t = 0; t < n; ++t) binned[t] = bin_of(row(t));

        for (long tau = 1; tau <= tau_max; ++tau) {
            std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
            const double N = static_cast<double>(n - tau);
            for (long t = tau; t < n; ++t) joint[binned[t] * bins + binned[t - tau]] += 1.0;
            std::vector<double> px(bins, 0.0), py(bins, 0.0);
            for (int i = 0; i < bins; ++i)
                for (int j = 0; j < bins; ++j) {
                    px[i] += joint[i * bins + j];
                    py[j] += joint[i * bins + j];
                }
            double mi = 0;
            for (int i = 0; i < bins; ++i)
                for (int j = 0; j < bins; ++j) {
                    const double c = joint[i * bins + j];
                    if (c > 0) mi += c / N * std::log2(c * N / (px[i] * py[j]));
                }
            result.dmi[tau - 1] += mi / static_cast<double>(series.n_vars());
        }
    }

    result.recommended_tau = tau_max;
    for (long tau = 2; tau + 1 <= tau_max; ++tau) {
        if (result.dmi[tau - 1] < result.dmi[tau - 2] && result.dmi[tau - 1] < result.dmi[tau]) {
            result.recommended_tau = tau;
            return result;
        }
    }
    const double floor_value = result.dmi[0] / std::numbers::e;
    for (long tau = 1; tau <= tau_max; ++tau) {
        if (result.dmi[tau - 1] < floor_value) {
            result.recommended_tau = tau;
            break;
        }
    }
    return result;
}

budget_report lag_budget_check(long tau, double dt, long n_lag, double lyapunov_time) {
    if (tau < 1 || dt <= 0 || n_lag < 1 || lyapunov_time <= 0)
        throw std::invalid_argument("lag_budget_check: all arguments must be positive");
    budget_report report;
    const double budget = static_cast<double>(tau) * dt * static_cast<double>(n_lag);
    report.margin = budget / lyapunov_time;
    report.pass = budget < lyapunov_time;
    return report;
}

}  // namespace delayrc
