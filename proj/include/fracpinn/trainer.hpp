#pragma once

#include "fracpinn/loss.hpp"
#include "fracpinn/model.hpp"
#include "fracpinn/net.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace fracpinn {

struct AdamConfig {
    double lr0 = 1e-3;
    double decay_rate = 0.5;
    int decay_every = 3000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int max_iters = 8000;
};

struct LbfgsConfig {
    int memory = 10;
    int max_iters = 500;
    double c1 = 1e-4; // Armijo
    double c2 = 0.9;  // curvature
    int max_line_evals = 25;
};

struct EarlyStopConfig {
    double tol = 1e-8;
    int patience = 500;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    AdamConfig adam;
    LbfgsConfig lbfgs;
    int pretrain_iters = 2000;
    EarlyStopConfig early_stop;
    LossWeights lambdas;
    ParamBounds bounds;
    GridSpec grid;
    std::vector<int> layer_dims = {1, 64, 64, 64, 5};
    OutputHead head = OutputHead::softmax;
    double alpha_init = 0.99;
    // Rate initialization, by default the midpoint of the Mpox admissible box.
    EpidemicParams rate_init = {0.2, 0.1385, 0.0535, 0.0155, 1.0};
};

struct HistoryRow {
    int iter = 0;
    int phase = 1; // 1 pretrain Adam, 2 joint Adam, 3 L-BFGS
    LossBreakdown bd;
    EpidemicParams params;
};

enum class StopReason { max_iters, early_stop, converged };

struct FitResult {
    EpidemicParams params_hat;
    RawParams raw_hat;
    Network network;
    std::vector<HistoryRow> history;
    std::vector<std::size_t> phase_boundaries;
    StopReason stop_reason = StopReason::max_iters;
    bool line_search_warning = false;
};

struct AdamState {
    Eigen::VectorXd m, v;
};

// One bias-corrected Adam update with the staircase learning-rate decay.
void adam_step(Eigen::VectorXd& x, AdamState& state, const Eigen::VectorXd& grad, int iter,
               const AdamConfig& cfg);

double learning_rate_at(int iter, const AdamConfig& cfg);

// Relative-improvement early stopping: fires after `patience` consecutive
// checks with improvement below tol.
class EarlyStopMonitor {
public:
    explicit EarlyStopMonitor(const EarlyStopConfig& cfg) : cfg_(cfg) {}

    // Returns true when the stop condition has just been met.
    bool observe(double loss);

private:
    EarlyStopConfig cfg_;
    double best_ = 0.0;
    bool has_best_ = false;
    int stall_ = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsReport {
    int iterations = 0;
    bool converged = false;           // gradient tolerance reached
    bool line_search_failed = false;  // returned best-so-far
};

// Limited-memory BFGS with a strong-Wolfe line search; the objective is
// non-increasing over accepted iterates. on_iterate, when given, fires once
// per accepted step.
Eigen::VectorXd lbfgs_optimize(const Objective& objective, const Eigen::VectorXd& x0,
                               const LbfgsConfig& cfg, LbfgsReport* report = nullptr,
                               const std::function<void(int, const Eigen::VectorXd&, double)>&
                                   on_iterate = nullptr);

// Staged training: pretrain at alpha = 1 on data + IC with Adam, then joint
// Adam on the full composite loss, then L-BFGS fine-tuning. When
// freeze_alpha is set, z_alpha is pinned at that order and removed from all
// gradients. Deterministic in cfg.seed.
FitResult fit(const ObservationSet& obs, const SimplexState& ic, const TrainConfig& cfg,
              std::optional<double> freeze_alpha = std::nullopt);

} // namespace fracpinn
