#pragma once

#include <array>
#include <optional>

namespace fracpinn {

using Vec5 = std::array<double, 5>; // (s, e, i, r, d)

// Population fractions on the probability simplex.
struct SimplexState {
    double s = 1.0, e = 0.0, i = 0.0, r = 0.0, d = 0.0;

    Vec5 vec() const { return {s, e, i, r, d}; }
    static SimplexState from_vec(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

    // Throws std::invalid_argument on negativity, sum drift > 1e-9, or d >= 1.
    void validate() const;
};

// Constrained epidemiological parameters: rates per day plus the memory order.
struct EpidemicParams {
    double beta = 0.25;
    double sigma = 0.13;
    double gamma_r = 0.052;
    double mu = 0.005;
    double alpha = 1.0;
};

// Unconstrained optimizer coordinates.
struct RawParams {
    double z_beta = 0.0, z_sigma = 0.0, z_gamma = 0.0, z_mu = 0.0, z_alpha = 0.0;

    std::array<double, 5> vec() const { return {z_beta, z_sigma, z_gamma, z_mu, z_alpha}; }
    static RawParams from_vec(const std::array<double, 5>& v) {
        return {v[0], v[1], v[2], v[3], v[4]};
    }
};

struct RateBox {
    double lo = 0.0, hi = 1.0;
};

// Transform configuration. Without a box a rate maps through softplus
// (beta additionally through a smooth min with beta_max); with a box the
// rate maps through lo + (hi-lo)*sigmoid(z), which keeps estimates inside
// the configured admissible range by construction.
struct ParamBounds {
    double alpha_min = 0.5;
    double beta_max = 1.0;
    std::array<std::optional<RateBox>, 4> boxes; // beta, sigma, gamma, mu
};

double softplus(double x);
double softplus_inv(double y); // y > 0
double sigmoid(double x);
double logit(double p); // p in (0,1)

EpidemicParams constrain(const RawParams& raw, const ParamBounds& bounds);

// Diagonal of the transform Jacobian, in the order (beta, sigma, gamma, mu, alpha).
std::array<double, 5> constrain_grad(const RawParams& raw, const ParamBounds& bounds);

// Inverse of constrain for parameters strictly inside the bounds.
RawParams unconstrain(const EpidemicParams& p, const ParamBounds& bounds);

// Right-hand side of the normalized fractional SEIRD system.
// Throws SolverError when 1 - d < 1e-12.
Vec5 rhs(const Vec5& state, const EpidemicParams& params);

struct RhsJacobian {
    double state[5][5]; // dF_row/d(s,e,i,r,d)
    double rates[5][4]; // dF_row/d(beta,sigma,gamma,mu)
};

RhsJacobian rhs_jacobian(const Vec5& state, const EpidemicParams& params);

} // namespace fracpinn
