#include "fracpinn/analysis.hpp"

#include "fracpinn/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

namespace fracpinn {

namespace {

// index-parallel map with a fixed thread cap; results land by index so the
// outcome is independent of scheduling
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) {
            body(k);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
                body(k);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace

std::vector<ProfilePoint> profile_alpha(const ObservationSet& obs, const SimplexState& ic,
                                        const TrainConfig& cfg,
                                        const std::vector<double>& alpha_grid, int jobs) {
    for (double a : alpha_grid) {
        if (!(a > cfg.bounds.alpha_min) || a > 1.0) {
            throw std::invalid_argument("profile_alpha: grid value outside (alpha_min, 1]");
        }
    }
    std::vector<ProfilePoint> points(alpha_grid.size());
    parallel_for(alpha_grid.size(), jobs, [&](std::size_t k) {
        ProfilePoint& pt = points[k];
        pt.alpha_fixed = alpha_grid[k];
        TrainConfig local = cfg;
        local.seed = cfg.seed + k;
        try {
            const FitResult res = fit(obs, ic, local, alpha_grid[k]);
            pt.refit_params = res.params_hat;
            pt.terminal_loss = res.history.back().bd.total;
        } catch (const std::exception& e) {
            pt.failed = true;
            pt.error = e.what();
        }
    });
    return points;
}

BootstrapSummary bootstrap(const ObservationSet& obs, const SimplexState& ic,
                           const TrainConfig& cfg, int n_replicates, std::uint64_t seed,
                           int jobs) {
    if (n_replicates < 2) {
        throw std::invalid_argument("bootstrap: need at least 2 replicates");
    }

    const FitResult point_fit = fit(obs, ic, cfg);

    // fitted values and residual rows at the observation times
    Eigen::VectorXd t_scaled(obs.size());
    const double T = cfg.grid.t_end();
    for (std::size_t j = 0; j < obs.size(); ++j) {
        t_scaled(j) = obs.time_at(j) / T;
    }
    const Eigen::MatrixXd fitted = forward(point_fit.network, t_scaled);
    const Eigen::MatrixXd residuals = obs.values - fitted;

    BootstrapSummary summary;
    summary.n_replicates = n_replicates;
    summary.point = point_fit.params_hat;

    const std::size_t n = obs.size();
    std::vector<EpidemicParams> estimates(n_replicates);
    std::vector<char> failed(n_replicates, 0);

    // draw all resampling indices up front so replicates stay independent
    // of execution order
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::vector<std::size_t>> picks(n_replicates, std::vector<std::size_t>(n));
    for (int rep = 0; rep < n_replicates; ++rep) {
        for (std::size_t j = 0; j < n; ++j) {
            picks[rep][j] = pick(rng);
        }
    }

    parallel_for(static_cast<std::size_t>(n_replicates), jobs, [&](std::size_t rep) {
        ObservationSet boot = obs;
        for (std::size_t j = 0; j < n; ++j) {
            for (int c = 0; c < 5; ++c) {
                boot.values(static_cast<Eigen::Index>(j), c) =
                    fitted(static_cast<Eigen::Index>(j), c) +
                    residuals(static_cast<Eigen::Index>(picks[rep][j]), c);
            }
        }
        TrainConfig local = cfg;
        local.seed = cfg.seed + 1000 + rep;
        try {
            estimates[rep] = fit(boot, ic, local).params_hat;
        } catch (const std::exception&) {
            failed[rep] = 1;
        }
    });

    int n_failed = 0;
    for (int rep = 0; rep < n_replicates; ++rep) {
        if (failed[rep]) {
            ++n_failed;
        } else {
            summary.replicates.push_back(estimates[rep]);
        }
    }
    summary.n_failed = n_failed;
    if (2 * n_failed > n_replicates) {
        throw TrainingError("bootstrap: more than half of the replicates failed");
    }

    // percentile CIs over the cloud including the point fit
    auto percentile_ci = [&](auto get, double& lo, double& hi) {
        std::vector<double> vals;
        vals.push_back(get(summary.point));
        for (const auto& p : summary.replicates) {
            vals.push_back(get(p));
        }
        std::sort(vals.begin(), vals.end());
        const double m = static_cast<double>(vals.size() - 1);
        lo = vals[static_cast<std::size_t>(std::floor(0.025 * m))];
        hi = vals[static_cast<std::size_t>(std::ceil(0.975 * m))];
    };
    percentile_ci([](const EpidemicParams& p) { return p.beta; }, summary.ci_lower[0],
                  summary.ci_upper[0]);
    percentile_ci([](const EpidemicParams& p) { return p.sigma; }, summary.ci_lower[1],
                  summary.ci_upper[1]);
    percentile_ci([](const EpidemicParams& p) { return p.gamma_r; }, summary.ci_lower[2],
                  summary.ci_upper[2]);
    percentile_ci([](const EpidemicParams& p) { return p.mu; }, summary.ci_lower[3],
                  summary.ci_upper[3]);
    percentile_ci([](const EpidemicParams& p) { return p.alpha; }, summary.ci_lower[4],
                  summary.ci_upper[4]);
    return summary;
}

FitResult ablation(const ObservationSet& obs, const SimplexState& ic, const TrainConfig& cfg,
                   const std::set<LossTerm>& disable) {
    TrainConfig local = cfg;
    if (disable.count(LossTerm::phys)) {
        local.lambdas.phys = 0.0;
    }
    if (disable.count(LossTerm::cons)) {
        local.lambdas.cons = 0.0;
    }
    if (disable.count(LossTerm::ic_term)) {
        local.lambdas.ic = 0.0;
    }
    if (disable.count(LossTerm::reg)) {
        local.lambdas.reg_theta = 0.0;
        local.lambdas.reg_params = 0.0;
    }
    return fit(obs, ic, local);
}

} // namespace fracpinn
