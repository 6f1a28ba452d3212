#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace delayrc {

/// Multivariate sampled trajectory, one column per time step.
struct time_series {
    Eigen::MatrixXd values;  // n_vars x n_steps
    double dt = 1.0;
    std::vector<std::string> var_names;

    long n_vars() const { return values.rows(); }
    long n_steps() const { return values.cols(); }

    /// Columns [start, start+count) as a new series.
    time_series segment(long start, long count) const;

    bool all_finite() const;
};

/// Per-variable affine map x -> (x - shift) / scale and its inverse.
struct affine_transform {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    static affine_transform identity(long n_vars);

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& y) const;
};

/// Zero-mean unit-variance transform fitted per variable; constant variables
/// keep scale 1 so the map stays invertible.
affine_transform fit_normalization(const Eigen::MatrixXd& data);

/// Shortest round-trip decimal form of a double, locale-independent.
std::string format_double(double v);
double parse_double(const std::string& s);

// CSV: header row with variable names, one row per time step, RFC-style
// quoting. The sidecar (written next to the CSV as <path>.meta.json) records
// dt and whatever metadata the producer passes.
void write_time_series_csv(const time_series& ts, const std::string& path);
void write_time_series_csv(const time_series& ts, const std::string& path,
                           const nlohmann::json& metadata);
time_series read_time_series_csv(const std::string& path);

}  // namespace delayrc
