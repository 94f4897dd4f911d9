#include "fracpinn/model.hpp"

#include "fracpinn/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracpinn {

namespace {
// Sharpness of the smooth-min clamp for beta in softplus mode. Large enough
// that the clamp is invisible (< 1e-10) well inside the admissible range.
constexpr double kClampSharpness = 50.0;
constexpr double kSingularFloor = 1e-12;
} // namespace

void SimplexState::validate() const {
    const Vec5 v = vec();
    double sum = 0.0;
    for (double x : v) {
        if (x < 0.0 || !std::isfinite(x)) {
            throw std::invalid_argument("SimplexState: negative or non-finite component");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("SimplexState: components sum to " + std::to_string(sum));
    }
    if (d >= 1.0) {
        throw std::invalid_argument("SimplexState: d must be < 1");
    }
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double softplus_inv(double y) {
    if (!(y > 0.0)) {
        throw std::domain_error("softplus_inv: argument must be > 0");
    }
    // ln(e^y - 1) = y + ln(1 - e^{-y})
    return y + std::log(-std::expm1(-y));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double ex = std::exp(x);
    return ex / (1.0 + ex);
}

double logit(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::domain_error("logit: argument must be in (0,1)");
    }
    return std::log(p) - std::log1p(-p);
}

namespace {

double constrain_rate(double z, const std::optional<RateBox>& box) {
    if (box) {
        return box->lo + (box->hi - box->lo) * sigmoid(z);
    }
    return softplus(z);
}

double constrain_rate_grad(double z, const std::optional<RateBox>& box) {
    if (box) {
        const double s = sigmoid(z);
        return (box->hi - box->lo) * s * (1.0 - s);
    }
    return sigmoid(z);
}

} // namespace

EpidemicParams constrain(const RawParams& raw, const ParamBounds& bounds) {
    EpidemicParams p;
    if (bounds.boxes[0]) {
        p.beta = constrain_rate(raw.z_beta, bounds.boxes[0]);
    } else {
        // smooth min with beta_max: u - softplus(k(u - beta_max))/k
        const double u = softplus(raw.z_beta);
        p.beta = u - softplus(kClampSharpness * (u - bounds.beta_max)) / kClampSharpness;
    }
    p.sigma = constrain_rate(raw.z_sigma, bounds.boxes[1]);
    p.gamma_r = constrain_rate(raw.z_gamma, bounds.boxes[2]);
    p.mu = constrain_rate(raw.z_mu, bounds.boxes[3]);
    p.alpha = bounds.alpha_min + (1.0 - bounds.alpha_min) * sigmoid(raw.z_alpha);
    return p;
}

std::array<double, 5> constrain_grad(const RawParams& raw, const ParamBounds& bounds) {
    std::array<double, 5> g{};
    if (bounds.boxes[0]) {
        g[0] = constrain_rate_grad(raw.z_beta, bounds.boxes[0]);
    } else {
        const double u = softplus(raw.z_beta);
        const double du = sigmoid(raw.z_beta);
        g[0] = du * (1.0 - sigmoid(kClampSharpness * (u - bounds.beta_max)));
    }
    g[1] = constrain_rate_grad(raw.z_sigma, bounds.boxes[1]);
    g[2] = constrain_rate_grad(raw.z_gamma, bounds.boxes[2]);
    g[3] = constrain_rate_grad(raw.z_mu, bounds.boxes[3]);
    const double sa = sigmoid(raw.z_alpha);
    g[4] = (1.0 - bounds.alpha_min) * sa * (1.0 - sa);
    return g;
}

namespace {

double unconstrain_rate(double value, const std::optional<RateBox>& box, const char* name) {
    if (box) {
        if (!(value > box->lo) || !(value < box->hi)) {
            throw std::domain_error(std::string("unconstrain: ") + name + " outside its box");
        }
        return logit((value - box->lo) / (box->hi - box->lo));
    }
    return softplus_inv(value);
}

} // namespace

RawParams unconstrain(const EpidemicParams& p, const ParamBounds& bounds) {
    RawParams raw;
    raw.z_beta = unconstrain_rate(p.beta, bounds.boxes[0], "beta");
    raw.z_sigma = unconstrain_rate(p.sigma, bounds.boxes[1], "sigma");
    raw.z_gamma = unconstrain_rate(p.gamma_r, bounds.boxes[2], "gamma");
    raw.z_mu = unconstrain_rate(p.mu, bounds.boxes[3], "mu");
    if (!(p.alpha > bounds.alpha_min) || !(p.alpha < 1.0)) {
        throw std::domain_error("unconstrain: alpha outside (alpha_min, 1)");
    }
    raw.z_alpha = logit((p.alpha - bounds.alpha_min) / (1.0 - bounds.alpha_min));
    return raw;
}

Vec5 rhs(const Vec5& x, const EpidemicParams& p) {
    const double w = 1.0 - x[4];
    if (w < kSingularFloor) {
        throw SolverError("rhs: 1 - d below singularity floor");
    }
    const double infection = p.beta * x[0] * x[2] / w;
    const double incubation = p.sigma * x[1];
    const double recovery = p.gamma_r * x[2];
    const double death = p.mu * x[2];
    return {-infection,
            infection - incubation,
            incubation - recovery - death,
            recovery,
            death};
}

RhsJacobian rhs_jacobian(const Vec5& x, const EpidemicParams& p) {
    const double w = 1.0 - x[4];
    if (w < kSingularFloor) {
        throw SolverError("rhs_jacobian: 1 - d below singularity floor");
    }
    const double gs = p.beta * x[2] / w;       // d(infection)/ds
    const double gi = p.beta * x[0] / w;       // d(infection)/di
    const double gd = p.beta * x[0] * x[2] / (w * w); // d(infection)/dd
    const double si = x[0] * x[2] / w;         // d(infection)/dbeta

    RhsJacobian j{};
    // row s
    j.state[0][0] = -gs;
    j.state[0][2] = -gi;
    j.state[0][4] = -gd;
    j.rates[0][0] = -si;
    // row e
    j.state[1][0] = gs;
    j.state[1][1] = -p.sigma;
    j.state[1][2] = gi;
    j.state[1][4] = gd;
    j.rates[1][0] = si;
    j.rates[1][1] = -x[1];
    // row i
    j.state[2][1] = p.sigma;
    j.state[2][2] = -(p.gamma_r + p.mu);
    j.rates[2][1] = x[1];
    j.rates[2][2] = -x[2];
    j.rates[2][3] = -x[2];
    // row r
    j.state[3][2] = p.gamma_r;
    j.rates[3][2] = x[2];
    // row d
    j.state[4][2] = p.mu;
    j.rates[4][3] = x[2];
    return j;
}

} // namespace fracpinn
