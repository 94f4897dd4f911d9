#pragma once

#include <cstddef>
#include <vector>

namespace fracpinn {

// Weights of the L1 discretization of the Caputo derivative on a uniform
// grid, together with their analytic derivatives with respect to alpha.
struct L1Stencil {
    double alpha = 1.0;
    double dt = 1.0;
    std::vector<double> weights;         // c_k, k = 0..n_max-1
    std::vector<double> dweights_dalpha; // dc_k/dalpha
};

// A function sampled on the uniform grid t_j = j*dt.
struct SampledSeries {
    double dt = 1.0;
    std::vector<double> values; // psi(t_0)..psi(t_N), length >= 2
};

// c_k = [(k+1)^{1-alpha} - k^{1-alpha}] / Gamma(2-alpha).
// Requires alpha in (0,1], dt > 0, n_max >= 1.
L1Stencil l1_weights(double alpha, double dt, std::size_t n_max);

// (1/dt^alpha) * sum_{k=0}^{n-1} c_k (psi(t_{n-k}) - psi(t_{n-k-1})),
// 1 <= n <= N. The stencil must carry the same dt and n_max >= n.
double caputo_l1(const SampledSeries& series, const L1Stencil& stencil, std::size_t n);

struct CaputoGrad {
    std::vector<double> dvalues; // d(out)/d psi(t_j), j = 0..n
    double dalpha = 0.0;         // through the weights and the dt^{-alpha} factor
};

CaputoGrad caputo_l1_grad(const SampledSeries& series, const L1Stencil& stencil, std::size_t n);

} // namespace fracpinn
