#pragma once

// Gamma, log-Gamma and digamma on the positive real axis. These back the
// L1 weight formulas and their derivatives with respect to the memory order.

namespace fracpinn::specfun {

// Gamma(x) for x > 0. Throws std::domain_error otherwise.
double gamma(double x);

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// psi(x) = Gamma'(x)/Gamma(x) for x > 0.
double digamma(double x);

} // namespace fracpinn::specfun
