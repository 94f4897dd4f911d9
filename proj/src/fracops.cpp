#include "fracpinn/fracops.hpp"

#include "fracpinn/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracpinn {

namespace {

void check_application(const SampledSeries& series, const L1Stencil& stencil, std::size_t n) {
    if (series.values.size() < 2) {
        throw std::invalid_argument("caputo_l1: series must have length >= 2");
    }
    if (n < 1 || n >= series.values.size()) {
        throw std::out_of_range("caputo_l1: node index n = " + std::to_string(n) +
                                " out of range [1, " + std::to_string(series.values.size() - 1) + "]");
    }
    if (std::abs(series.dt - stencil.dt) > 1e-12 * std::max(1.0, std::abs(stencil.dt))) {
        throw std::invalid_argument("caputo_l1: series dt does not match stencil dt");
    }
    if (stencil.weights.size() < n) {
        throw std::invalid_argument("caputo_l1: stencil too short for node n");
    }
}

} // namespace

L1Stencil l1_weights(double alpha, double dt, std::size_t n_max) {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw std::domain_error("l1_weights: alpha must lie in (0, 1]");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::domain_error("l1_weights: dt must be positive and finite");
    }
    if (n_max < 1) {
        throw std::domain_error("l1_weights: n_max must be >= 1");
    }

    L1Stencil st;
    st.alpha = alpha;
    st.dt = dt;
    st.weights.resize(n_max);
    st.dweights_dalpha.resize(n_max);

    const double one_m_a = 1.0 - alpha;
    const double inv_gamma = 1.0 / specfun::gamma(2.0 - alpha);
    const double psi2ma = specfun::digamma(2.0 - alpha);

    for (std::size_t k = 0; k < n_max; ++k) {
        const double kp1 = static_cast<double>(k + 1);
        const double kd = static_cast<double>(k);
        const double p1 = std::pow(kp1, one_m_a);
        const double p0 = (k == 0) ? 0.0 : std::pow(kd, one_m_a);
        const double c = (p1 - p0) * inv_gamma;
        st.weights[k] = c;

        // d/dalpha [ (k+1)^{1-a} - k^{1-a} ] = -ln(k+1)(k+1)^{1-a} + ln(k) k^{1-a}
        double ddiff = -std::log(kp1) * p1;
        if (k >= 1) {
            ddiff += std::log(kd) * p0;
        }
        // d(1/Gamma(2-a))/da = psi(2-a)/Gamma(2-a)
        st.dweights_dalpha[k] = ddiff * inv_gamma + c * psi2ma;
    }
    return st;
}

double caputo_l1(const SampledSeries& series, const L1Stencil& stencil, std::size_t n) {
    check_application(series, stencil, n);
    const double scale = std::pow(stencil.dt, -stencil.alpha);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += stencil.weights[k] * (series.values[n - k] - series.values[n - k - 1]);
    }
    return scale * acc;
}

CaputoGrad caputo_l1_grad(const SampledSeries& series, const L1Stencil& stencil, std::size_t n) {
    check_application(series, stencil, n);
    const double scale = std::pow(stencil.dt, -stencil.alpha);
    const double log_dt = std::log(stencil.dt);

    CaputoGrad g;
    g.dvalues.assign(n + 1, 0.0);

    double acc = 0.0;  // sum c_k * dpsi
    double dacc = 0.0; // sum dc_k/dalpha * dpsi
    for (std::size_t k = 0; k < n; ++k) {
        const double dpsi = series.values[n - k] - series.values[n - k - 1];
        acc += stencil.weights[k] * dpsi;
        dacc += stencil.dweights_dalpha[k] * dpsi;
        g.dvalues[n - k] += scale * stencil.weights[k];
        g.dvalues[n - k - 1] -= scale * stencil.weights[k];
    }
    // d(dt^{-a})/da = -ln(dt) dt^{-a}
    g.dalpha = scale * dacc - log_dt * scale * acc;
    return g;
}

} // namespace fracpinn
