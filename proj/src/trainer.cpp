#include "fracpinn/trainer.hpp"

#include "fracpinn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fracpinn {

double learning_rate_at(int iter, const AdamConfig& cfg) {
    const int stage = iter / cfg.decay_every;
    return cfg.lr0 * std::pow(cfg.decay_rate, stage);
}

void adam_step(Eigen::VectorXd& x, AdamState& state, const Eigen::VectorXd& grad, int iter,
               const AdamConfig& cfg) {
    if (!grad.allFinite()) {
        throw TrainingError("adam_step: non-finite gradient at iteration " + std::to_string(iter));
    }
    if (state.m.size() != x.size()) {
        state.m = Eigen::VectorXd::Zero(x.size());
        state.v = Eigen::VectorXd::Zero(x.size());
    }
    const double lr = learning_rate_at(iter, cfg);
    const double t = static_cast<double>(iter + 1);
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    x -= (lr * (state.m / bc1).array() / ((state.v / bc2).array().sqrt() + cfg.eps)).matrix();
}

bool EarlyStopMonitor::observe(double loss) {
    if (!has_best_) {
        best_ = loss;
        has_best_ = true;
        return false;
    }
    const double rel_improvement = (best_ - loss) / std::max(std::abs(best_), 1e-300);
    if (rel_improvement < cfg_.tol) {
        ++stall_;
    } else {
        stall_ = 0;
    }
    best_ = std::min(best_, loss);
    return stall_ >= cfg_.patience;
}

namespace {

struct LinePoint {
    double a = 0.0, f = 0.0, df = 0.0;
};

// Strong-Wolfe line search (bracket + zoom with bisection). Returns the
// accepted step and guarantees the last objective evaluation happened at it.
bool line_search(const Objective& obj, const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                 double f0, const Eigen::VectorXd& g0, const LbfgsConfig& cfg, double& a_out,
                 double& f_out, Eigen::VectorXd& g_out) {
    const double dphi0 = g0.dot(d);
    if (dphi0 >= 0.0) {
        return false;
    }
    Eigen::VectorXd g(x.size());
    int evals = 0;
    auto phi = [&](double a, double& df) {
        const double f = obj(x + a * d, g);
        ++evals;
        df = g.dot(d);
        return f;
    };

    auto accept = [&](double a, double f) {
        a_out = a;
        f_out = f;
        g_out = g;
        return true;
    };

    auto zoom = [&](LinePoint lo, LinePoint hi) {
        while (evals < cfg.max_line_evals) {
            const double a = 0.5 * (lo.a + hi.a);
            double df;
            const double f = phi(a, df);
            if (f > f0 + cfg.c1 * a * dphi0 || f >= lo.f) {
                hi = {a, f, df};
            } else {
                if (std::abs(df) <= -cfg.c2 * dphi0) {
                    return accept(a, f);
                }
                if (df * (hi.a - lo.a) >= 0.0) {
                    hi = lo;
                }
                lo = {a, f, df};
            }
            if (std::abs(hi.a - lo.a) < 1e-16) {
                break;
            }
        }
        // budget exhausted: fall back to the best Armijo point if any
        if (lo.a > 0.0 && lo.f <= f0 + cfg.c1 * lo.a * dphi0) {
            double df;
            const double f = phi(lo.a, df);
            return accept(lo.a, f);
        }
        return false;
    };

    LinePoint prev{0.0, f0, dphi0};
    double a = 1.0;
    while (evals < cfg.max_line_evals) {
        double df;
        const double f = phi(a, df);
        if (f > f0 + cfg.c1 * a * dphi0 || (prev.a > 0.0 && f >= prev.f)) {
            return zoom(prev, {a, f, df});
        }
        if (std::abs(df) <= -cfg.c2 * dphi0) {
            return accept(a, f);
        }
        if (df >= 0.0) {
            return zoom({a, f, df}, prev);
        }
        prev = {a, f, df};
        a *= 2.0;
        if (a > 1e6) {
            break;
        }
    }
    return false;
}

} // namespace

Eigen::VectorXd lbfgs_optimize(const Objective& objective, const Eigen::VectorXd& x0,
                               const LbfgsConfig& cfg, LbfgsReport* report,
                               const std::function<void(int, const Eigen::VectorXd&, double)>&
                                   on_iterate) {
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g(x.size());
    double f = objective(x, g);

    Eigen::VectorXd best_x = x;
    double best_f = f;

    std::vector<Eigen::VectorXd> s_hist, y_hist;
    std::vector<double> rho_hist;

    LbfgsReport rep;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < 1e-12) {
            rep.converged = true;
            break;
        }
        // two-loop recursion
        Eigen::VectorXd q = g;
        const int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha_coef(m);
        for (int k = m - 1; k >= 0; --k) {
            alpha_coef[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha_coef[k] * y_hist[k];
        }
        double gamma = 1.0;
        if (m > 0) {
            gamma = s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
        }
        Eigen::VectorXd d = gamma * q;
        for (int k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(d);
            d += (alpha_coef[k] - beta) * s_hist[k];
        }
        d = -d;
        if (d.dot(g) >= 0.0) {
            d = -g; // fall back to steepest descent
        }

        double a, f_new;
        Eigen::VectorXd g_new(x.size());
        if (!line_search(objective, x, d, f, g, cfg, a, f_new, g_new)) {
            rep.line_search_failed = true;
            break;
        }
        const Eigen::VectorXd s = a * d;
        const Eigen::VectorXd y = g_new - g;
        x += s;
        f = f_new;
        g = g_new;
        ++rep.iterations;
        if (on_iterate) {
            on_iterate(rep.iterations, x, f);
        }
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
    }
    if (report) {
        *report = rep;
    }
    return best_f <= f ? best_x : x;
}

namespace {

constexpr int kRawCount = 5;

RawParams raw_from_tail(const Eigen::VectorXd& x) {
    const Eigen::Index p = x.size() - kRawCount;
    return {x(p), x(p + 1), x(p + 2), x(p + 3), x(p + 4)};
}

void check_admissible(const EpidemicParams& p, const ParamBounds& bounds, int iter) {
    const bool ok = p.beta > 0.0 && p.sigma > 0.0 && p.gamma_r > 0.0 && p.mu > 0.0 &&
                    p.beta <= bounds.beta_max + 1e-12 && p.alpha > bounds.alpha_min &&
                    p.alpha <= 1.0;
    if (!ok) {
        throw TrainingError("fit: parameters left the admissible box at iteration " +
                            std::to_string(iter));
    }
}

} // namespace

FitResult fit(const ObservationSet& obs, const SimplexState& ic, const TrainConfig& cfg,
              std::optional<double> freeze_alpha) {
    if (obs.size() == 0) {
        throw std::invalid_argument("fit: empty observation set");
    }
    ic.validate();

    Network net = init_xavier(cfg.layer_dims, cfg.head, cfg.seed);
    const Eigen::Index P = static_cast<Eigen::Index>(net.n_params());

    EpidemicParams init = cfg.rate_init;
    init.alpha = std::clamp(cfg.alpha_init, cfg.bounds.alpha_min + 1e-6, 1.0 - 1e-9);
    RawParams raw0 = unconstrain(init, cfg.bounds);

    Eigen::VectorXd x(P + kRawCount);
    net.to_flat(x.head(P));
    const auto rv = raw0.vec();
    for (int k = 0; k < kRawCount; ++k) {
        x(P + k) = rv[k];
    }

    FitResult result;
    LossBreakdown last_bd;
    EpidemicParams last_params;

    auto evaluate = [&](const Eigen::VectorXd& xv, LossMode mode, Eigen::VectorXd* gout) {
        net.from_flat(xv.head(P));
        const RawParams raw = raw_from_tail(xv);
        std::optional<double> override_alpha;
        if (mode == LossMode::pretrain) {
            override_alpha = 1.0;
        } else if (freeze_alpha) {
            override_alpha = *freeze_alpha;
        }
        LossGrad lg;
        const LossBreakdown bd = loss_total(net, raw, obs, ic, cfg.grid, cfg.lambdas, cfg.bounds,
                                            mode, gout ? &lg : nullptr, override_alpha);
        if (gout) {
            gout->resize(x.size());
            gout->head(P) = lg.dnet;
            for (int k = 0; k < kRawCount; ++k) {
                (*gout)(P + k) = lg.draw[k];
            }
            if (mode == LossMode::pretrain || freeze_alpha) {
                (*gout)(P + kRawCount - 1) = 0.0;
            }
        }
        last_bd = bd;
        last_params = constrain(raw, cfg.bounds);
        if (override_alpha) {
            last_params.alpha = *override_alpha;
        }
        return bd;
    };

    auto log_row = [&](int iter, int phase) {
        result.history.push_back({iter, phase, last_bd, last_params});
    };

    auto guard = [&](double total, double initial, int iter) {
        if (!std::isfinite(total)) {
            throw TrainingError("fit: non-finite loss at iteration " + std::to_string(iter));
        }
        if (total > 1e6 * initial && total > 1e-8) {
            throw TrainingError("fit: divergence at iteration " + std::to_string(iter) +
                                " (total " + std::to_string(total) + ")");
        }
    };

    // ---- phase 1: pretrain at alpha = 1 on data + IC ----
    {
        AdamState adam;
        EarlyStopMonitor monitor(cfg.early_stop);
        Eigen::VectorXd g;
        double initial = -1.0;
        const double z_alpha_before = x(P + kRawCount - 1);
        for (int iter = 0; iter < cfg.pretrain_iters; ++iter) {
            const LossBreakdown bd = evaluate(x, LossMode::pretrain, &g);
            if (initial < 0.0) {
                initial = std::max(bd.total, 1e-12);
            }
            guard(bd.total, initial, iter);
            log_row(iter, 1);
            if (monitor.observe(bd.total)) {
                break;
            }
            adam_step(x, adam, g, iter, cfg.adam);
            if (x(P + kRawCount - 1) != z_alpha_before) {
                throw TrainingError("fit: z_alpha moved during pretraining");
            }
        }
    }
    result.phase_boundaries.push_back(result.history.size());

    // ---- phase 2: joint Adam on the full composite loss ----
    bool phase2_early = false;
    {
        AdamState adam;
        EarlyStopMonitor monitor(cfg.early_stop);
        Eigen::VectorXd g;
        double initial = -1.0;
        for (int iter = 0; iter < cfg.adam.max_iters; ++iter) {
            const LossBreakdown bd = evaluate(x, LossMode::joint, &g);
            if (initial < 0.0) {
                initial = std::max(bd.total, 1e-12);
            }
            guard(bd.total, initial, iter);
            check_admissible(last_params, cfg.bounds, iter);
            log_row(iter, 2);
            if (monitor.observe(bd.total)) {
                phase2_early = true;
                break;
            }
            adam_step(x, adam, g, iter, cfg.adam);
        }
    }
    result.phase_boundaries.push_back(result.history.size());

    // ---- phase 3: L-BFGS fine-tuning on all trainables ----
    LbfgsReport lbfgs_report;
    if (cfg.lbfgs.max_iters > 0) {
        Objective objective = [&](const Eigen::VectorXd& xv, Eigen::VectorXd& gv) {
            const LossBreakdown bd = evaluate(xv, LossMode::joint, &gv);
            return bd.total;
        };
        auto on_iterate = [&](int iter, const Eigen::VectorXd& xv, double) {
            evaluate(xv, LossMode::joint, nullptr);
            log_row(iter, 3);
        };
        x = lbfgs_optimize(objective, x, cfg.lbfgs, &lbfgs_report, on_iterate);
        Eigen::VectorXd g;
        evaluate(x, LossMode::joint, &g);
    }
    result.phase_boundaries.push_back(result.history.size());

    net.from_flat(x.head(P));
    result.network = net;
    result.raw_hat = raw_from_tail(x);
    result.params_hat = last_params;
    result.line_search_warning = lbfgs_report.line_search_failed;
    if (lbfgs_report.converged) {
        result.stop_reason = StopReason::converged;
    } else if (phase2_early) {
        result.stop_reason = StopReason::early_stop;
    } else {
        result.stop_reason = StopReason::max_iters;
    }
    return result;
}

} // namespace fracpinn
