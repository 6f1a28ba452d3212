#include "delayrc/reservoir.hpp"

#include "delayrc/rng.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace delayrc {

namespace {

void validate(const reservoir_config& c) {
    if (c.neurons < 1) throw std::invalid_argument("reservoir_config: neurons must be >= 1");
    if (c.input_dim < 1) throw std::invalid_argument("reservoir_config: input_dim must be >= 1");
    if (c.spectral_radius < 0)
        throw std::invalid_argument("reservoir_config: spectral_radius must be >= 0");
    if (c.input_scale < 0)
        throw std::invalid_argument("reservoir_config: input_scale must be >= 0");
    if (c.density <= 0 || c.density > 1)
        throw std::invalid_argument("reservoir_config: density must be in (0,1]");
    if (c.leak <= 0 || c.leak > 1)
        throw std::invalid_argument("reservoir_config: leak must be in (0,1]");
}

// Power iteration tracking the dominant eigenvalue modulus. The last three
// normalized iterates are fitted to A^2 w = p A w - q w, whose characteristic
// roots cover both a real dominant eigenvalue and a complex conjugate pair.
// The estimate is exactly equivariant under scaling of A, so rescaling by
// rho / estimate lands the spectral radius on rho to within rounding.
double power_iteration_radius(const Eigen::SparseMatrix<double>& a) {
    const long n = a.rows();
    Eigen::VectorXd w2 = Eigen::VectorXd::Ones(n).normalized();  // w_{k-2}
    Eigen::VectorXd w1 = a * w2;                                 // w_{k-1}
    double s1 = w1.norm();                                       // |A w_{k-2}|
    if (s1 == 0) return 0.0;
    w1 /= s1;

    double estimate = s1;
    int stable = 0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd v = a * w1;
        const double s = v.norm();
        if (s == 0) return 0.0;
        const Eigen::VectorXd w = v / s;

        // Fit s1*s*w = p * s1*w1 - q * w2 in least squares; closed form in
        // terms of the pairwise dots of the normalized iterates.
        const double d12 = w1.dot(w2);
        const double dw1 = w.dot(w1);
        const double dw2 = w.dot(w2);
        const double denom = 1.0 - d12 * d12;
        double current;
        if (denom < 1e-12) {
            // iterates collinear: real dominant eigenvalue, plain ratio works
            current = s;
        } else {
            const double p = s * (dw1 - d12 * dw2) / denom;
            const double q = s1 * s * (d12 * dw1 - dw2) / denom;
            const double disc = p * p - 4 * q;
            if (disc >= 0) {
                const double sq = std::sqrt(disc);
                current = std::max(std::abs((p + sq) / 2), std::abs((p - sq) / 2));
            } else {
                current = std::sqrt(q);
            }
        }
        if (std::abs(current - estimate) <= 1e-12 * std::max(current, 1e-300)) {
            if (++stable >= 3 && it >= 20) return current;
        } else {
            stable = 0;
        }
        estimate = current;
        w2 = w1;
        w1 = w;
        s1 = s;
    }
    return estimate;
}

}  // namespace

double spectral_radius(const Eigen::SparseMatrix<double>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
    if (m.nonZeros() == 0) return 0.0;
    if (m.rows() <= 512) {
        Eigen::MatrixXd dense(m);
        Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, /*computeEigenvectors=*/false);
        return solver.eigenvalues().cwiseAbs().maxCoeff();
    }
    return power_iteration_radius(m);
}

reservoir build_reservoir(const reservoir_config& config) {
    validate(config);
    const long m = config.neurons, n = config.input_dim;

    reservoir res;
    res.config = config;

    rng in_gen(derive_seed(config.seed, "w_in"));
    res.w_in.resize(m, n);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j)
            res.w_in(i, j) = in_gen.uniform(-config.input_scale, config.input_scale);

    rng res_gen(derive_seed(config.seed, "w_res"));
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(static_cast<double>(m) * m * config.density * 1.2) + 16);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j)
            if (res_gen.uniform01() < config.density)
                triplets.emplace_back(i, j, res_gen.uniform(-1.0, 1.0));
    res.w_res.resize(m, m);
    res.w_res.setFromTriplets(triplets.begin(), triplets.end());

    if (config.spectral_radius == 0.0) {
        res.w_res.setZero();
        res.achieved_spectral_radius = 0.0;
        return res;
    }

    const double raw_radius = spectral_radius(res.w_res);
    if (raw_radius == 0.0)
        throw std::runtime_error(
            fmt::format("build_reservoir: sampled recurrent matrix has spectral radius 0 "
                        "(m={}, density={}, seed={}); increase density or change seed",
                        m, config.density, config.seed));
    res.w_res *= config.spectral_radius / raw_radius;
    res.achieved_spectral_radius = spectral_radius(res.w_res);
    return res;
}

state_sequence drive(const reservoir& res, const time_series& inputs,
                     const Eigen::VectorXd& r0, long washout) {
    const long m = res.config.neurons;
    if (inputs.n_vars() != res.config.input_dim)
        throw std::invalid_argument(fmt::format(
            "drive: input has {} variables but reservoir expects {}", inputs.n_vars(),
            res.config.input_dim));
    if (r0.size() != m)
        throw std::invalid_argument(
            fmt::format("drive: r0 has size {} but reservoir has {} neurons", r0.size(), m));
    if ((r0.array().abs() >= 1.0).any())
        throw std::invalid_argument("drive: r0 entries must lie in (-1, 1)");

    const double alpha = res.config.leak;
    const long T = inputs.n_steps();
    state_sequence seq;
    seq.washout = washout;
    seq.states.resize(m, T);

    Eigen::VectorXd r = r0;
    Eigen::VectorXd pre(m);
    for (long t = 0; t < T; ++t) {
        pre.noalias() = res.w_res * r;
        pre.noalias() += res.w_in * inputs.values.col(t);
        r = (1.0 - alpha) * r + alpha * pre.array().tanh().matrix();
        seq.states.col(t) = r;
    }
    return seq;
}

state_sequence drive(const reservoir& res, const time_series& inputs, long washout) {
    return drive(res, inputs, Eigen::VectorXd::Zero(res.config.neurons), washout);
}

echo_state_report echo_state_check(const reservoir& res, const time_series& inputs,
                                   int trials, double tol, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("echo_state_check: trials must be >= 2");
    const long m = res.config.neurons;
    std::vector<state_sequence> runs;
    runs.reserve(trials);
    for (int i = 0; i < trials; ++i) {
        rng gen(derive_seed(seed, "esp-trial", {static_cast<std::uint64_t>(i)}));
        Eigen::VectorXd r0(m);
        for (long j = 0; j < m; ++j) r0[j] = gen.uniform(-0.999, 0.999);
        runs.push_back(drive(res, inputs, r0, /*washout=*/0));
    }

    echo_state_report report;
    const long T = inputs.n_steps();
    report.decay.resize(T);
    for (long t = 0; t < T; ++t) {
        double worst = 0;
        for (int i = 0; i < trials; ++i)
            for (int j = i + 1; j < trials; ++j)
                worst = std::max(worst,
                                 (runs[i].states.col(t) - runs[j].states.col(t)).norm());
        report.decay[t] = worst;
    }
    report.pass = !report.decay.empty() && report.decay.back() < tol;
    return report;
}

}  // namespace delayrc
