#include "fracpinn/solver.hpp"

#include "fracpinn/errors.hpp"
#include "fracpinn/fracops.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracpinn {

namespace {

Vec5 axpy(const Vec5& x, double a, const Vec5& y) {
    return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2], x[3] + a * y[3], x[4] + a * y[4]};
}

double max_abs_diff(const Vec5& a, const Vec5& b) {
    double m = 0.0;
    for (int c = 0; c < 5; ++c) {
        m = std::max(m, std::abs(a[c] - b[c]));
    }
    return m;
}

void check_state(const Vec5& x, std::size_t step) {
    if (1.0 - x[4] < 1e-12) {
        throw SolverError("simulate: d reached 1 at step " + std::to_string(step));
    }
    for (int c = 0; c < 5; ++c) {
        if (!std::isfinite(x[c])) {
            throw SolverError("simulate: non-finite state at step " + std::to_string(step));
        }
    }
}

} // namespace

Trajectory simulate(const SimplexState& ic, const EpidemicParams& params, double dt,
                    std::size_t n_steps, const SolverConfig& cfg) {
    ic.validate();
    if (!(dt > 0.0) || n_steps < 1) {
        throw std::invalid_argument("simulate: need dt > 0 and n_steps >= 1");
    }
    const L1Stencil st = l1_weights(params.alpha, dt, n_steps);
    const double dt_a = std::pow(dt, params.alpha);
    const double c0 = st.weights[0];

    Trajectory traj;
    traj.dt = dt;
    traj.states.reserve(n_steps + 1);
    traj.states.push_back(ic.vec());

    std::vector<Vec5> increments; // x_m - x_{m-1}, m = 1..n-1
    increments.reserve(n_steps);

    for (std::size_t n = 1; n <= n_steps; ++n) {
        const Vec5& prev = traj.states[n - 1];

        // history term H = sum_{k=1}^{n-1} c_k (x_{n-k} - x_{n-k-1})
        Vec5 history{};
        for (std::size_t k = 1; k < n; ++k) {
            const Vec5& inc = increments[n - k - 1];
            const double ck = st.weights[k];
            for (int c = 0; c < 5; ++c) {
                history[c] += ck * inc[c];
            }
        }

        // c_0 (x_n - x_{n-1}) + H = dt^alpha F(x_*)
        auto step_from = [&](const Vec5& eval_point) {
            const Vec5 f = rhs(eval_point, params);
            Vec5 x;
            for (int c = 0; c < 5; ++c) {
                x[c] = prev[c] + (dt_a * f[c] - history[c]) / c0;
            }
            return x;
        };

        Vec5 next;
        if (cfg.scheme == Scheme::explicit_step) {
            next = step_from(prev);
        } else {
            next = step_from(prev); // predictor
            bool converged = false;
            for (int it = 0; it < cfg.fixed_point_max_iter; ++it) {
                const Vec5 candidate = step_from(next);
                const double delta = max_abs_diff(candidate, next);
                next = candidate;
                if (delta < cfg.fixed_point_tol) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                throw SolverError("simulate: fixed-point iteration failed to converge at step " +
                                  std::to_string(n));
            }
        }
        check_state(next, n);
        increments.push_back(axpy(next, -1.0, prev));
        traj.states.push_back(next);
    }
    return traj;
}

Trajectory simulate_classical_rk4(const SimplexState& ic, const EpidemicParams& params,
                                  double dt, std::size_t n_steps) {
    ic.validate();
    if (!(dt > 0.0) || n_steps < 1) {
        throw std::invalid_argument("simulate_classical_rk4: need dt > 0 and n_steps >= 1");
    }
    Trajectory traj;
    traj.dt = dt;
    traj.states.reserve(n_steps + 1);
    traj.states.push_back(ic.vec());

    for (std::size_t n = 1; n <= n_steps; ++n) {
        const Vec5& x = traj.states[n - 1];
        const Vec5 k1 = rhs(x, params);
        const Vec5 k2 = rhs(axpy(x, 0.5 * dt, k1), params);
        const Vec5 k3 = rhs(axpy(x, 0.5 * dt, k2), params);
        const Vec5 k4 = rhs(axpy(x, dt, k3), params);
        Vec5 next;
        for (int c = 0; c < 5; ++c) {
            next[c] = x[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        check_state(next, n);
        traj.states.push_back(next);
    }
    return traj;
}

double peak_time(const Trajectory& traj) {
    if (traj.states.empty()) {
        throw std::invalid_argument("peak_time: empty trajectory");
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < traj.states.size(); ++j) {
        if (traj.states[j][2] > traj.states[best][2]) {
            best = j;
        }
    }
    return traj.time_at(best);
}

double peak_height(const Trajectory& traj) {
    if (traj.states.empty()) {
        throw std::invalid_argument("peak_height: empty trajectory");
    }
    double best = traj.states[0][2];
    for (const Vec5& x : traj.states) {
        best = std::max(best, x[2]);
    }
    return best;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_trajectory_csv: cannot open " + path);
    }
    out << "t,s,e,i,r,d\n";
    char buf[512];
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        const Vec5& x = traj.states[j];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      traj.time_at(j), x[0], x[1], x[2], x[3], x[4]);
        out << buf;
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("read_trajectory_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("read_trajectory_csv: empty file " + path);
    }
    Trajectory traj;
    double t0 = 0.0, t1 = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        double t;
        Vec5 x;
        char comma;
        if (!(ss >> t >> comma >> x[0] >> comma >> x[1] >> comma >> x[2] >> comma >> x[3] >>
              comma >> x[4])) {
            throw IoError("read_trajectory_csv: malformed row in " + path);
        }
        if (traj.states.empty()) {
            t0 = t;
        } else if (traj.states.size() == 1) {
            t1 = t;
        }
        traj.states.push_back(x);
    }
    if (traj.states.size() >= 2) {
        traj.dt = t1 - t0;
    }
    return traj;
}

} // namespace fracpinn
