#include "delayrc/dynamics.hpp"

#include "delayrc/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace delayrc {

namespace {

using vec3 = std::array<double, 3>;

vec3 lorenz_rhs(const lorenz_params& p, const vec3& s) {
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1],
            s[0] * s[1] - p.beta * s[2]};
}

vec3 axpy(const vec3& x, double a, const vec3& y) {
    return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2]};
}

void lorenz_rk4_step(const lorenz_params& p, vec3& s) {
    const double h = p.dt;
    const vec3 k1 = lorenz_rhs(p, s);
    const vec3 k2 = lorenz_rhs(p, axpy(s, h / 2, k1));
    const vec3 k3 = lorenz_rhs(p, axpy(s, h / 2, k2));
    const vec3 k4 = lorenz_rhs(p, axpy(s, h, k3));
    for (int i = 0; i < 3; ++i)
        s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

bool finite3(const vec3& s) {
    return std::isfinite(s[0]) && std::isfinite(s[1]) && std::isfinite(s[2]);
}

void validate_common(double dt, long n_steps, long n_discard, const char* what) {
    if (dt <= 0) throw std::invalid_argument(fmt::format("{}: dt must be positive", what));
    if (n_steps < 1) throw std::invalid_argument(fmt::format("{}: n_steps must be >= 1", what));
    if (n_discard < 0) throw std::invalid_argument(fmt::format("{}: n_discard must be >= 0", what));
}

}  // namespace

time_series generate_lorenz(const lorenz_params& params) {
    validate_common(params.dt, params.n_steps, params.n_discard, "generate_lorenz");
    time_series ts;
    ts.dt = params.dt;
    ts.var_names = {"x1", "x2", "x3"};
    ts.values.resize(3, params.n_steps);

    vec3 s = params.x0;
    for (long step = 0; step < params.n_discard; ++step) {
        lorenz_rk4_step(params, s);
        if (!finite3(s))
            throw std::runtime_error(
                fmt::format("generate_lorenz: state diverged at step {}", step + 1));
    }
    for (long i = 0; i < params.n_steps; ++i) {
        ts.values(0, i) = s[0];
        ts.values(1, i) = s[1];
        ts.values(2, i) = s[2];
        if (i + 1 < params.n_steps) {
            lorenz_rk4_step(params, s);
            if (!finite3(s))
                throw std::runtime_error(fmt::format("generate_lorenz: state diverged at step {}",
                                                     params.n_discard + i + 1));
        }
    }
    return ts;
}

// ---------------------------------------------------------------------------
// Gene regulation model: method of steps with RK4. The solution grid is
// stored together with its derivatives so the half-step delayed reads can use
// cubic Hermite interpolation; reads at or before t = 0 evaluate the history
// directly.

namespace {

double hill_inhibit(double x, double theta, double h) {
    if (x <= 0) return 1.0;
    return 1.0 / (1.0 + std::pow(x / theta, h));
}

double hill_activate(double x, double theta, double h) {
    if (x <= 0) return 0.0;
    const double r = std::pow(x / theta, h);
    return r / (1.0 + r);
}

long delay_steps(double tau, double dt, const char* what) {
    const double ratio = tau / dt;
    const long rounded = std::lround(ratio);
    const double tol = 1e-12 * std::max(1.0, std::abs(ratio));
    if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) > tol)
        throw std::invalid_argument(
            fmt::format("{}: dt={} must divide delay {} (ratio {})", what, dt, tau, ratio));
    return rounded;
}

// Integrator state: ring-free buffer of the last (hist+1) grid values and
// derivatives; buffer index hist is "now".
struct gene_integrator {
    gene_model_params p;
    long s1 = 0, s2 = 0, hist = 0;
    std::vector<double> x;      // values at t - (hist-j)*dt
    std::vector<double> dx;     // derivatives at the same nodes
    long step_count = 0;        // steps taken from t = 0
    std::function<double(double)> history_fn;

    explicit gene_integrator(const gene_model_params& params) : p(params) {
        validate_common(p.dt, p.n_steps, p.n_discard, "generate_gene_model");
        if (p.k_decay <= 0)
            throw std::invalid_argument("generate_gene_model: k_decay must be positive");
        if (p.g_gain < 0)
            throw std::invalid_argument("generate_gene_model: g_gain must be non-negative");
        if (p.tau1 <= 0 || p.tau2 <= 0)
            throw std::invalid_argument("generate_gene_model: delays must be positive");
        s1 = delay_steps(p.tau1, p.dt, "generate_gene_model");
        s2 = delay_steps(p.tau2, p.dt, "generate_gene_model");
        hist = std::max(s1, s2);
        const double max_tau = static_cast<double>(hist) * p.dt;
        if (p.history && p.history_span < max_tau - 1e-12)
            throw std::invalid_argument(
                fmt::format("generate_gene_model: history spans {} but max delay is {}",
                            p.history_span, max_tau));
        history_fn = p.history ? p.history
                               : [v = p.history_value](double) { return v; };
        x.resize(hist + 1);
        dx.resize(hist + 1);
        for (long j = 0; j <= hist; ++j) {
            x[j] = history_fn(-static_cast<double>(hist - j) * p.dt);
            dx[j] = 0.0;  // never read: interpolation below t=0 calls history_fn
        }
        // the t=0 node is the one seeded slot whose derivative Hermite reads
        dx[hist] = rhs(x[hist], history_fn(-p.tau1), history_fn(-p.tau2));
    }

    double rhs(double xt, double x_tau1, double x_tau2) const {
        return -p.k_decay * xt +
               p.g_gain * hill_inhibit(x_tau1, p.theta1, p.hill1) *
                   hill_activate(x_tau2, p.theta2, p.hill2);
    }

    // Value at now - back*dt, back in [0, hist], integer or half-integer grid.
    double delayed(double back) const {
        const double rel = static_cast<double>(step_count) - back;  // read time in steps
        if (rel <= 1e-9) return history_fn(std::min(rel * p.dt, 0.0));
        const double pos = static_cast<double>(hist) - back;  // buffer coordinate
        const long j = static_cast<long>(std::floor(pos + 1e-9));
        const double theta = pos - static_cast<double>(j);
        if (std::abs(theta) < 1e-9) return x[j];
        // cubic Hermite between nodes j and j+1
        const double h = p.dt;
        const double t2 = theta * theta, t3 = t2 * theta;
        return (2 * t3 - 3 * t2 + 1) * x[j] + (t3 - 2 * t2 + theta) * h * dx[j] +
               (-2 * t3 + 3 * t2) * x[j + 1] + (t3 - t2) * h * dx[j + 1];
    }

    void step() {
        const double h = p.dt;
        const double xn = x[hist];
        const double k1 = rhs(xn, delayed(s1), delayed(s2));
        const double z1h = delayed(static_cast<double>(s1) - 0.5);
        const double z2h = delayed(static_cast<double>(s2) - 0.5);
        const double k2 = rhs(xn + h / 2 * k1, z1h, z2h);
        const double k3 = rhs(xn + h / 2 * k2, z1h, z2h);
        const double z1f = delayed(static_cast<double>(s1) - 1.0);
        const double z2f = delayed(static_cast<double>(s2) - 1.0);
        const double k4 = rhs(xn + h * k3, z1f, z2f);
        const double xnew = xn + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);

        for (long j = 0; j < hist; ++j) {
            x[j] = x[j + 1];
            dx[j] = dx[j + 1];
        }
        ++step_count;
        x[hist] = xnew;
        dx[hist] = rhs(xnew, delayed(s1), delayed(s2));
        if (!std::isfinite(xnew))
            throw std::runtime_error(
                fmt::format("generate_gene_model: state diverged at step {}", step_count));
    }
};

}  // namespace

time_series generate_gene_model(const gene_model_params& params) {
    gene_integrator integ(params);
    time_series ts;
    ts.dt = params.dt;
    ts.var_names = {"x"};
    ts.values.resize(1, params.n_steps);
    for (long step = 0; step < params.n_discard; ++step) integ.step();
    for (long i = 0; i < params.n_steps; ++i) {
        ts.values(0, i) = integ.x[integ.hist];
        if (i + 1 < params.n_steps) integ.step();
    }
    return ts;
}

// ---------------------------------------------------------------------------
// Coupled map lattice.

namespace {

struct lattice_stepper {
    lattice_params p;
    long n = 0;

    explicit lattice_stepper(const lattice_params& params) : p(params) {
        if (p.height < 2 || p.width < 2)
            throw std::invalid_argument("generate_lattice: grid dims must be >= 2");
        if (p.coupling < 0 || p.coupling > 1)
            throw std::invalid_argument("generate_lattice: coupling must be in [0,1]");
        if (p.map == lattice_map::logistic && (p.map_param < 0 || p.map_param > 4))
            throw std::invalid_argument("generate_lattice: logistic parameter must be in [0,4]");
        validate_common(p.dt, p.n_steps, p.n_discard, "generate_lattice");
        n = p.height * p.width;
    }

    double local(double v) const {
        return p.map == lattice_map::logistic ? p.map_param * v * (1.0 - v) : v;
    }

    std::vector<double> initial() const {
        rng gen(derive_seed(p.seed, "lattice-init"));
        std::vector<double> grid(n);
        for (double& v : grid) v = gen.uniform01();
        return grid;
    }

    void step(std::vector<double>& grid, std::vector<double>& scratch) const {
        const long H = p.height, W = p.width;
        for (long i = 0; i < n; ++i) scratch[i] = local(grid[i]);
        const double eps = p.coupling;
        for (long r = 0; r < H; ++r) {
            const long up = (r + H - 1) % H, dn = (r + 1) % H;
            for (long c = 0; c < W; ++c) {
                const long lf = (c + W - 1) % W, rt = (c + 1) % W;
                const double nb = scratch[up * W + c] + scratch[dn * W + c] +
                                  scratch[r * W + lf] + scratch[r * W + rt];
                grid[r * W + c] = (1.0 - eps) * scratch[r * W + c] + eps / 4.0 * nb;
            }
        }
    }
};

}  // namespace

time_series generate_lattice(const lattice_params& params) {
    lattice_stepper st(params);
    std::vector<double> grid = st.initial();
    std::vector<double> scratch(st.n);
    for (long step = 0; step < params.n_discard; ++step) st.step(grid, scratch);

    time_series ts;
    ts.dt = params.dt;
    ts.var_names.reserve(st.n);
    for (long r = 0; r < params.height; ++r)
        for (long c = 0; c < params.width; ++c)
            ts.var_names.push_back(fmt::format("c{}_{}", r, c));
    ts.values.resize(st.n, params.n_steps);
    for (long i = 0; i < params.n_steps; ++i) {
        for (long j = 0; j < st.n; ++j) ts.values(j, i) = grid[j];
        if (i + 1 < params.n_steps) st.step(grid, scratch);
    }
    return ts;
}

time_series random_input_sequence(std::uint64_t seed, long n_steps, double amplitude) {
    if (n_steps < 1) throw std::invalid_argument("random_input_sequence: n_steps must be >= 1");
    if (amplitude < 0)
        throw std::invalid_argument("random_input_sequence: amplitude must be >= 0");
    rng gen(derive_seed(seed, "input-sequence"));
    time_series ts;
    ts.dt = 1.0;
    ts.var_names = {"u"};
    ts.values.resize(1, n_steps);
    for (long i = 0; i < n_steps; ++i) ts.values(0, i) = gen.uniform(-amplitude, amplitude);
    return ts;
}

// ---------------------------------------------------------------------------
// Lyapunov systems.

namespace {

class lorenz_system final : public lyapunov_system {
public:
    explicit lorenz_system(const lorenz_params& p) : p_(p) {}
    double dt() const override { return p_.dt; }
    std::vector<double> initial_state() const override {
        vec3 s = p_.x0;
        for (long i = 0; i < p_.n_discard; ++i) lorenz_rk4_step(p_, s);
        return {s[0], s[1], s[2]};
    }
    void advance(std::vector<double>& state) const override {
        vec3 s{state[0], state[1], state[2]};
        lorenz_rk4_step(p_, s);
        state = {s[0], s[1], s[2]};
    }

private:
    lorenz_params p_;
};

class gene_system final : public lyapunov_system {
public:
    explicit gene_system(const gene_model_params& p) : proto_(p), base_(warm_integrator(p)) {}
    double dt() const override { return proto_.dt; }
    std::vector<double> initial_state() const override {
        std::vector<double> s;
        s.reserve(2 * (base_.hist + 1));
        s.insert(s.end(), base_.x.begin(), base_.x.end());
        s.insert(s.end(), base_.dx.begin(), base_.dx.end());
        return s;
    }
    void advance(std::vector<double>& state) const override {
        gene_integrator integ = base_;
        const long n = base_.hist + 1;
        std::copy(state.begin(), state.begin() + n, integ.x.begin());
        std::copy(state.begin() + n, state.end(), integ.dx.begin());
        integ.step();
        std::copy(integ.x.begin(), integ.x.end(), state.begin());
        std::copy(integ.dx.begin(), integ.dx.end(), state.begin() + n);
    }

private:
    // transient plus enough steps that the exported buffer is entirely
    // computed solution (no history-function reads afterwards)
    static gene_integrator warm_integrator(const gene_model_params& p) {
        gene_integrator integ(p);
        const long warm = std::max(p.n_discard, integ.hist + 2);
        for (long i = 0; i < warm; ++i) integ.step();
        return integ;
    }

    gene_model_params proto_;
    gene_integrator base_;
};

class lattice_system final : public lyapunov_system {
public:
    explicit lattice_system(const lattice_params& p) : st_(p) {}
    double dt() const override { return st_.p.dt; }
    std::vector<double> initial_state() const override {
        std::vector<double> grid = st_.initial();
        std::vector<double> scratch(st_.n);
        for (long i = 0; i < st_.p.n_discard; ++i) st_.step(grid, scratch);
        return grid;
    }
    void advance(std::vector<double>& state) const override {
        std::vector<double> scratch(st_.n);
        st_.step(state, scratch);
    }

private:
    lattice_stepper st_;
};

class linear_decay_system final : public lyapunov_system {
public:
    linear_decay_system(double rate, double dt) : rate_(rate), dt_(dt) {}
    double dt() const override { return dt_; }
    std::vector<double> initial_state() const override { return {1.0}; }
    void advance(std::vector<double>& state) const override {
        // RK4 for x' = -rate x
        const double h = dt_, x = state[0];
        const double k1 = -rate_ * x;
        const double k2 = -rate_ * (x + h / 2 * k1);
        const double k3 = -rate_ * (x + h / 2 * k2);
        const double k4 = -rate_ * (x + h * k3);
        state[0] = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

private:
    double rate_, dt_;
};

class logistic_map_system final : public lyapunov_system {
public:
    explicit logistic_map_system(double a) : a_(a) {}
    double dt() const override { return 1.0; }
    std::vector<double> initial_state() const override {
        double x = 0.3;
        for (int i = 0; i < 1000; ++i) x = a_ * x * (1.0 - x);
        return {x};
    }
    void advance(std::vector<double>& state) const override {
        state[0] = a_ * state[0] * (1.0 - state[0]);
    }

private:
    double a_;
};

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

std::unique_ptr<lyapunov_system> make_lyapunov_system(const lorenz_params& params) {
    return std::make_unique<lorenz_system>(params);
}
std::unique_ptr<lyapunov_system> make_lyapunov_system(const gene_model_params& params) {
    return std::make_unique<gene_system>(params);
}
std::unique_ptr<lyapunov_system> make_lyapunov_system(const lattice_params& params) {
    return std::make_unique<lattice_system>(params);
}
std::unique_ptr<lyapunov_system> make_linear_decay_system(double rate, double dt) {
    return std::make_unique<linear_decay_system>(rate, dt);
}
std::unique_ptr<lyapunov_system> make_logistic_map_system(double a) {
    return std::make_unique<logistic_map_system>(a);
}

lyapunov_result estimate_lyapunov(const lyapunov_system& sys, double horizon,
                                  const lyapunov_options& opt) {
    if (horizon <= 0) throw std::invalid_argument("estimate_lyapunov: horizon must be positive");
    const double d0 = opt.separation;
    std::vector<double> a = sys.initial_state();
    std::vector<double> b = a;

    rng gen(derive_seed(opt.seed, "lyapunov-perturbation"));
    double norm = 0;
    std::vector<double> dir(a.size());
    for (double& v : dir) {
        v = gen.uniform(-1.0, 1.0);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += d0 * dir[i] / norm;

    const long segments =
        std::max<long>(1, std::llround(horizon / (sys.dt() * static_cast<double>(opt.renorm_every))));
    double log_sum = 0;
    for (long seg = 0; seg < segments; ++seg) {
        for (long s = 0; s < opt.renorm_every; ++s) {
            sys.advance(a);
            sys.advance(b);
        }
        const double d = l2_distance(a, b);
        if (!(d > 0) || !std::isfinite(d))
            throw std::runtime_error("estimate_lyapunov: trajectories collapsed or diverged");
        log_sum += std::log(d / d0);
        const double pull = d0 / d;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = a[i] + (b[i] - a[i]) * pull;
    }

    lyapunov_result res;
    res.lambda = log_sum /
                 (static_cast<double>(segments) * static_cast<double>(opt.renorm_every) * sys.dt());
    res.chaotic = res.lambda > 0;
    res.lyapunov_time =
        res.chaotic ? 1.0 / res.lambda : std::numeric_limits<double>::infinity();
    return res;
}

}  // namespace delayrc
