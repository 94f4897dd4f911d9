#pragma once

#include "fracpinn/trainer.hpp"

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace fracpinn {

struct ProfilePoint {
    double alpha_fixed = 1.0;
    EpidemicParams refit_params;
    double terminal_loss = 0.0;
    bool failed = false;
    std::string error;
};

// Refits with alpha frozen at each grid value and records the terminal
// total loss. Points are independent; point k is seeded with cfg.seed + k.
std::vector<ProfilePoint> profile_alpha(const ObservationSet& obs, const SimplexState& ic,
                                        const TrainConfig& cfg,
                                        const std::vector<double>& alpha_grid, int jobs = 1);

struct BootstrapSummary {
    int n_replicates = 0;
    EpidemicParams point;
    std::array<double, 5> ci_lower{}; // (beta, sigma, gamma, mu, alpha)
    std::array<double, 5> ci_upper{};
    std::vector<EpidemicParams> replicates;
    int n_failed = 0;
};

// Residual bootstrap: fit once, resample residual rows at observation times
// with replacement onto the fitted values, refit per replicate, report
// percentile CIs over the cloud (point fit included).
BootstrapSummary bootstrap(const ObservationSet& obs, const SimplexState& ic,
                           const TrainConfig& cfg, int n_replicates, std::uint64_t seed,
                           int jobs = 1);

enum class LossTerm { phys, cons, ic_term, reg };

// Runs fit() with the named lambda weights set to zero.
FitResult ablation(const ObservationSet& obs, const SimplexState& ic, const TrainConfig& cfg,
                   const std::set<LossTerm>& disable);

} // namespace fracpinn
