#pragma once

#include "fracpinn/model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace fracpinn {

struct Trajectory {
    double dt = 1.0;
    std::vector<Vec5> states; // node j holds the state at t_j = j*dt

    std::size_t n_nodes() const { return states.size(); }
    double time_at(std::size_t j) const { return static_cast<double>(j) * dt; }
};

enum class Scheme { explicit_step, implicit };

struct SolverConfig {
    Scheme scheme = Scheme::implicit;
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 50;
};

// L1 time stepping of the normalized fractional SEIRD system. At every step
// the discrete Caputo relation holds with F evaluated at the previous node
// (explicit) or the new node via fixed-point iteration (implicit). No
// renormalization is applied; conservation must emerge from the scheme.
Trajectory simulate(const SimplexState& ic, const EpidemicParams& params, double dt,
                    std::size_t n_steps, const SolverConfig& cfg = {});

// Classical RK4 on the integer-order system; alpha is ignored. Used as the
// reference in the alpha = 1 limit.
Trajectory simulate_classical_rk4(const SimplexState& ic, const EpidemicParams& params,
                                  double dt, std::size_t n_steps);

// Time of the maximum of i(t); ties break toward the earliest node.
double peak_time(const Trajectory& traj);
double peak_height(const Trajectory& traj);

// CSV with header t,s,e,i,r,d at full double precision.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

} // namespace fracpinn
