#pragma once

#include "fracpinn/fracops.hpp"
#include "fracpinn/model.hpp"
#include "fracpinn/net.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <cstddef>
#include <vector>

namespace fracpinn {

struct LossWeights {
    double data = 1.0;
    double phys = 1.0;
    double ic = 10.0;
    double cons = 0.0;       // 0 with the softmax head, 1 with softplus
    double reg_theta = 1e-6; // network weights
    double reg_params = 0.0; // raw epidemiological parameters
};

// Observations on a subset of the uniform grid. `values` is n_obs x 5;
// columns of masked-out compartments are ignored.
struct ObservationSet {
    double dt = 1.0;
    std::vector<std::size_t> node_index; // grid node per observation, sorted
    Eigen::MatrixXd values;              // n_obs x 5
    std::array<bool, 5> mask = {true, true, true, true, true};

    std::size_t size() const { return node_index.size(); }
    double time_at(std::size_t j) const { return static_cast<double>(node_index[j]) * dt; }
};

struct LossBreakdown {
    double data = 0.0, phys = 0.0, ic = 0.0, cons = 0.0, reg = 0.0;
    double total = 0.0;
};

enum class LossMode { pretrain, joint };

// The uniform collocation grid; the network is evaluated on all of it so
// that the L1 history is available at every node.
struct GridSpec {
    double dt = 0.5;
    std::size_t n_nodes = 601; // N + 1

    double t_end() const { return static_cast<double>(n_nodes - 1) * dt; }
};

struct LossGrad {
    Eigen::VectorXd dnet;              // flat gradient over weights and biases
    std::array<double, 5> draw{};      // d/d(z_beta, z_sigma, z_gamma, z_mu, z_alpha)
};

// --- individual terms on precomputed grid outputs (points x 5) ---

double loss_data(const Eigen::MatrixXd& grid_outputs, const ObservationSet& obs);

// Mean over collocation nodes 1..colloc_n of the squared discrete residual
// caputo_l1(x_hat) - F(x_hat(t_n)), summed over compartments.
double physics_residual(const Eigen::MatrixXd& outputs, const L1Stencil& stencil,
                        const EpidemicParams& params, double dt, std::size_t colloc_n);

double loss_ic(const Eigen::MatrixXd& grid_outputs, const SimplexState& ic);

double loss_conservation(const Eigen::MatrixXd& grid_outputs, std::size_t colloc_n);

double loss_reg(const Network& net, const RawParams& raw, const LossWeights& lambdas);

// --- wrappers evaluating the network on the grid (spec operation surface) ---

double loss_data(const Network& net, const GridSpec& grid, const ObservationSet& obs);
double loss_physics(const Network& net, const GridSpec& grid, const L1Stencil& stencil,
                    const EpidemicParams& params, std::size_t colloc_n);
double loss_ic(const Network& net, const SimplexState& ic);
double loss_conservation(const Network& net, const GridSpec& grid, std::size_t colloc_n);

// Composite loss with exact reverse-mode gradient. Pretrain mode sums only
// the data and IC terms (alpha frozen at 1, z_alpha gradient zero); joint
// mode sums all five terms and differentiates through the L1 stencil with
// respect to z_alpha.
// alpha_override pins the memory order at an exact value (profile sweeps,
// the alpha = 1 pretrain limit); the z_alpha gradient is then identically 0.
LossBreakdown loss_total(const Network& net, const RawParams& raw, const ObservationSet& obs,
                         const SimplexState& ic, const GridSpec& grid, const LossWeights& lambdas,
                         const ParamBounds& bounds, LossMode mode, LossGrad* grad = nullptr,
                         std::optional<double> alpha_override = std::nullopt);

} // namespace fracpinn
