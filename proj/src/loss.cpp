#include "fracpinn/loss.hpp"

#include "fracpinn/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracpinn {

namespace {

Eigen::VectorXd grid_times_scaled(const GridSpec& grid) {
    Eigen::VectorXd t(grid.n_nodes);
    const double denom = static_cast<double>(grid.n_nodes - 1);
    for (std::size_t j = 0; j < grid.n_nodes; ++j) {
        t(j) = static_cast<double>(j) / denom; // t_j / T
    }
    return t;
}

void check_obs(const ObservationSet& obs, std::size_t n_nodes) {
    if (obs.size() == 0) {
        throw std::invalid_argument("loss_data: empty observation set");
    }
    if (static_cast<std::size_t>(obs.values.rows()) != obs.size() || obs.values.cols() != 5) {
        throw std::invalid_argument("loss_data: observation value shape mismatch");
    }
    for (std::size_t idx : obs.node_index) {
        if (idx >= n_nodes) {
            throw std::invalid_argument("loss_data: observation node " + std::to_string(idx) +
                                        " outside the grid");
        }
    }
}

} // namespace

double loss_data(const Eigen::MatrixXd& grid_outputs, const ObservationSet& obs) {
    check_obs(obs, static_cast<std::size_t>(grid_outputs.rows()));
    double acc = 0.0;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        const Eigen::Index row = static_cast<Eigen::Index>(obs.node_index[j]);
        for (int c = 0; c < 5; ++c) {
            if (!obs.mask[c]) {
                continue;
            }
            const double err = grid_outputs(row, c) - obs.values(static_cast<Eigen::Index>(j), c);
            acc += err * err;
        }
    }
    return acc / static_cast<double>(obs.size());
}

double physics_residual(const Eigen::MatrixXd& outputs, const L1Stencil& stencil,
                        const EpidemicParams& params, double dt, std::size_t colloc_n) {
    const std::size_t n_nodes = static_cast<std::size_t>(outputs.rows());
    if (colloc_n < 1 || colloc_n >= n_nodes) {
        throw std::invalid_argument("physics_residual: colloc_n out of range");
    }
    if (std::abs(stencil.dt - dt) > 1e-12 * std::max(1.0, dt) || stencil.weights.size() < colloc_n) {
        throw std::invalid_argument("physics_residual: stencil does not match the grid");
    }
    const double scale = std::pow(dt, -stencil.alpha);
    double acc = 0.0;
    for (std::size_t n = 1; n <= colloc_n; ++n) {
        Vec5 cap{};
        for (std::size_t k = 0; k < n; ++k) {
            const double ck = stencil.weights[k];
            for (int c = 0; c < 5; ++c) {
                cap[c] += ck * (outputs(n - k, c) - outputs(n - k - 1, c));
            }
        }
        const Vec5 x = {outputs(n, 0), outputs(n, 1), outputs(n, 2), outputs(n, 3), outputs(n, 4)};
        const Vec5 f = rhs(x, params);
        for (int c = 0; c < 5; ++c) {
            const double res = scale * cap[c] - f[c];
            acc += res * res;
        }
    }
    return acc / static_cast<double>(colloc_n);
}

double loss_ic(const Eigen::MatrixXd& grid_outputs, const SimplexState& ic) {
    const Vec5 target = ic.vec();
    double acc = 0.0;
    for (int c = 0; c < 5; ++c) {
        const double err = grid_outputs(0, c) - target[c];
        acc += err * err;
    }
    return acc;
}

double loss_conservation(const Eigen::MatrixXd& grid_outputs, std::size_t colloc_n) {
    if (colloc_n < 1 || colloc_n >= static_cast<std::size_t>(grid_outputs.rows())) {
        throw std::invalid_argument("loss_conservation: colloc_n out of range");
    }
    double acc = 0.0;
    for (std::size_t n = 1; n <= colloc_n; ++n) {
        const double gap = grid_outputs.row(static_cast<Eigen::Index>(n)).sum() - 1.0;
        acc += gap * gap;
    }
    return acc / static_cast<double>(colloc_n);
}

double loss_reg(const Network& net, const RawParams& raw, const LossWeights& lambdas) {
    double wsq = 0.0;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        wsq += net.weights[l].squaredNorm() + net.biases[l].squaredNorm();
    }
    double zsq = 0.0;
    for (double z : raw.vec()) {
        zsq += z * z;
    }
    return lambdas.reg_theta * wsq + lambdas.reg_params * zsq;
}

double loss_data(const Network& net, const GridSpec& grid, const ObservationSet& obs) {
    return loss_data(forward(net, grid_times_scaled(grid)), obs);
}

double loss_physics(const Network& net, const GridSpec& grid, const L1Stencil& stencil,
                    const EpidemicParams& params, std::size_t colloc_n) {
    return physics_residual(forward(net, grid_times_scaled(grid)), stencil, params, grid.dt,
                            colloc_n);
}

double loss_ic(const Network& net, const SimplexState& ic) {
    Eigen::VectorXd t0(1);
    t0(0) = 0.0;
    return loss_ic(forward(net, t0), ic);
}

double loss_conservation(const Network& net, const GridSpec& grid, std::size_t colloc_n) {
    return loss_conservation(forward(net, grid_times_scaled(grid)), colloc_n);
}

LossBreakdown loss_total(const Network& net, const RawParams& raw, const ObservationSet& obs,
                         const SimplexState& ic, const GridSpec& grid, const LossWeights& lambdas,
                         const ParamBounds& bounds, LossMode mode, LossGrad* grad,
                         std::optional<double> alpha_override) {
    if (grid.n_nodes < 2) {
        throw std::invalid_argument("loss_total: grid needs at least two nodes");
    }
    if (std::abs(obs.dt - grid.dt) > 1e-12 * std::max(1.0, grid.dt)) {
        throw std::invalid_argument("loss_total: observation dt does not match the grid");
    }
    check_obs(obs, grid.n_nodes);

    const std::size_t N = grid.n_nodes - 1; // collocation nodes 1..N
    const double n_obs = static_cast<double>(obs.size());

    Tape tape;
    const Eigen::VectorXd t_scaled = grid_times_scaled(grid);
    const Eigen::MatrixXd Y = forward(net, t_scaled, grad ? &tape : nullptr);

    Eigen::MatrixXd dY;
    if (grad) {
        dY = Eigen::MatrixXd::Zero(Y.rows(), 5);
    }

    LossBreakdown bd;

    // data misfit
    for (std::size_t j = 0; j < obs.size(); ++j) {
        const Eigen::Index row = static_cast<Eigen::Index>(obs.node_index[j]);
        for (int c = 0; c < 5; ++c) {
            if (!obs.mask[c]) {
                continue;
            }
            const double err = Y(row, c) - obs.values(static_cast<Eigen::Index>(j), c);
            bd.data += err * err;
            if (grad) {
                dY(row, c) += lambdas.data * 2.0 * err / n_obs;
            }
        }
    }
    bd.data /= n_obs;

    // initial condition
    const Vec5 x0 = ic.vec();
    for (int c = 0; c < 5; ++c) {
        const double err = Y(0, c) - x0[c];
        bd.ic += err * err;
        if (grad) {
            dY(0, c) += lambdas.ic * 2.0 * err;
        }
    }

    std::array<double, 5> draw{};
    EpidemicParams params = constrain(raw, bounds);
    if (alpha_override) {
        params.alpha = *alpha_override;
    }

    if (mode == LossMode::joint) {
        // conservation
        for (std::size_t n = 1; n <= N; ++n) {
            const double gap = Y.row(static_cast<Eigen::Index>(n)).sum() - 1.0;
            bd.cons += gap * gap;
            if (grad) {
                const double w = lambdas.cons * 2.0 * gap / static_cast<double>(N);
                for (int c = 0; c < 5; ++c) {
                    dY(static_cast<Eigen::Index>(n), c) += w;
                }
            }
        }
        bd.cons /= static_cast<double>(N);

        // physics residual through the L1 operator
        const L1Stencil st = l1_weights(params.alpha, grid.dt, N);
        const double scale = std::pow(grid.dt, -params.alpha);
        const double log_dt = std::log(grid.dt);

        Eigen::MatrixXd cap(N + 1, 5), dcap_da(N + 1, 5), res(N + 1, 5);
        for (std::size_t n = 1; n <= N; ++n) {
            Vec5 acc{}, dacc{};
            for (std::size_t k = 0; k < n; ++k) {
                const double ck = st.weights[k];
                const double dck = st.dweights_dalpha[k];
                for (int c = 0; c < 5; ++c) {
                    const double dpsi = Y(n - k, c) - Y(n - k - 1, c);
                    acc[c] += ck * dpsi;
                    dacc[c] += dck * dpsi;
                }
            }
            const Vec5 x = {Y(n, 0), Y(n, 1), Y(n, 2), Y(n, 3), Y(n, 4)};
            const Vec5 f = rhs(x, params);
            for (int c = 0; c < 5; ++c) {
                cap(n, c) = scale * acc[c];
                dcap_da(n, c) = scale * dacc[c] - log_dt * scale * acc[c];
                const double r = cap(n, c) - f[c];
                res(n, c) = r;
                bd.phys += r * r;
            }
        }
        bd.phys /= static_cast<double>(N);

        if (grad) {
            double dalpha = 0.0;
            std::array<double, 4> drates{};
            const double wscale = lambdas.phys * 2.0 / static_cast<double>(N);
            for (std::size_t n = 1; n <= N; ++n) {
                const Vec5 x = {Y(n, 0), Y(n, 1), Y(n, 2), Y(n, 3), Y(n, 4)};
                const RhsJacobian J = rhs_jacobian(x, params);
                Vec5 w;
                for (int c = 0; c < 5; ++c) {
                    w[c] = wscale * res(n, c);
                    dalpha += w[c] * dcap_da(n, c);
                }
                // -dF/dx and -dF/drates at the current node
                for (int c = 0; c < 5; ++c) {
                    for (int cc = 0; cc < 5; ++cc) {
                        dY(n, cc) -= w[c] * J.state[c][cc];
                    }
                    for (int p = 0; p < 4; ++p) {
                        drates[p] -= w[c] * J.rates[c][p];
                    }
                }
                // adjoint of the history sum
                for (std::size_t k = 0; k < n; ++k) {
                    const double cw = scale * st.weights[k];
                    for (int c = 0; c < 5; ++c) {
                        dY(n - k, c) += w[c] * cw;
                        dY(n - k - 1, c) -= w[c] * cw;
                    }
                }
            }
            const std::array<double, 5> tj = constrain_grad(raw, bounds);
            for (int p = 0; p < 4; ++p) {
                draw[p] = drates[p] * tj[p];
            }
            draw[4] = alpha_override ? 0.0 : dalpha * tj[4];
        }

        // regularization (carries its internal coefficients)
        bd.reg = loss_reg(net, raw, lambdas);

        bd.total = lambdas.data * bd.data + lambdas.phys * bd.phys + lambdas.ic * bd.ic +
                   lambdas.cons * bd.cons + bd.reg;
    } else {
        bd.total = lambdas.data * bd.data + lambdas.ic * bd.ic;
    }

    if (grad) {
        NetGrad ng = backward(net, tape, dY);
        grad->dnet = ng.to_flat();
        if (mode == LossMode::joint && lambdas.reg_theta != 0.0) {
            Eigen::VectorXd flat(net.n_params());
            net.to_flat(flat);
            grad->dnet += 2.0 * lambdas.reg_theta * flat;
        }
        if (mode == LossMode::joint && lambdas.reg_params != 0.0) {
            const std::array<double, 5> z = raw.vec();
            for (int p = 0; p < 5; ++p) {
                draw[p] += 2.0 * lambdas.reg_params * z[p];
            }
        }
        grad->draw = draw;
    }
    return bd;
}

} // namespace fracpinn
