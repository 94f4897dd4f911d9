#include "fracpinn/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace fracpinn::specfun {

namespace {

// Lanczos approximation, g = 7, 9 coefficients.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

double lanczos_log_gamma(double x) {
    // valid for x >= 0.5
    const double z = x - 1.0;
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) {
        acc += kLanczos[i] / (z + i);
    }
    const double t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(acc);
}

void check_domain(double x, const char* who) {
    if (!(x > 0.0)) {
        throw std::domain_error(std::string(who) + ": argument must be > 0");
    }
}

} // namespace

double log_gamma(double x) {
    check_domain(x, "log_gamma");
    if (x < 0.5) {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::log(M_PI / std::sin(M_PI * x)) - lanczos_log_gamma(1.0 - x);
    }
    return lanczos_log_gamma(x);
}

double gamma(double x) {
    check_domain(x, "gamma");
    if (x < 0.5) {
        return M_PI / (std::sin(M_PI * x) * std::exp(lanczos_log_gamma(1.0 - x)));
    }
    return std::exp(lanczos_log_gamma(x));
}

double digamma(double x) {
    check_domain(x, "digamma");
    // shift to x >= 6, then the asymptotic series
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // psi(x) ~ ln x - 1/(2x) - sum B_{2n} / (2n x^{2n})
    double series = inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                    inv2 * (1.0 / 252.0 -
                    inv2 * (1.0 / 240.0 -
                    inv2 * (1.0 / 132.0 -
                    inv2 * (691.0 / 32760.0))))));
    result += std::log(x) - 0.5 * inv - series;
    return result;
}

} // namespace fracpinn::specfun
