#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracpinn/fracops.hpp"
#include "fracpinn/specfun.hpp"

#include <cmath>
#include <stdexcept>

using namespace fracpinn;

namespace {

SampledSeries sample(double dt, std::size_t n_nodes, double (*f)(double)) {
    SampledSeries s;
    s.dt = dt;
    s.values.resize(n_nodes);
    for (std::size_t j = 0; j < n_nodes; ++j) {
        s.values[j] = f(static_cast<double>(j) * dt);
    }
    return s;
}

} // namespace

TEST_CASE("weights at alpha = 1 reduce to the backward difference") {
    const auto st = l1_weights(1.0, 0.1, 20);
    CHECK(st.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t k = 1; k < 20; ++k) {
        CHECK(std::abs(st.weights[k]) < 1e-14);
    }
}

TEST_CASE("weights at alpha = 0.5") {
    const auto st = l1_weights(0.5, 1.0, 4);
    const double c0 = 2.0 / std::sqrt(M_PI);
    CHECK(st.weights[0] == doctest::Approx(c0).epsilon(1e-12));
    CHECK(st.weights[1] == doctest::Approx((std::sqrt(2.0) - 1.0) * c0).epsilon(1e-12));
    CHECK(st.weights[1] == doctest::Approx(0.467393).epsilon(1e-5));
}

TEST_CASE("weights are positive and strictly decreasing for alpha in (0,1)") {
    for (double alpha : {0.2, 0.5, 0.8, 0.99}) {
        const auto st = l1_weights(alpha, 0.5, 200);
        CHECK(st.weights[0] ==
              doctest::Approx(1.0 / specfun::gamma(2.0 - alpha)).epsilon(1e-13));
        for (std::size_t k = 0; k + 1 < st.weights.size(); ++k) {
            CHECK(st.weights[k] > 0.0);
            CHECK(st.weights[k + 1] < st.weights[k]);
        }
    }
}

TEST_CASE("weight telescoping sum") {
    for (double alpha : {0.3, 0.6, 0.9}) {
        const auto st = l1_weights(alpha, 1.0, 5000);
        const double inv_g = 1.0 / specfun::gamma(2.0 - alpha);
        double acc = 0.0;
        for (std::size_t n = 1; n <= 5000; ++n) {
            acc += st.weights[n - 1];
            const double expect = std::pow(static_cast<double>(n), 1.0 - alpha) * inv_g;
            CHECK(std::abs(acc - expect) / expect < 1e-12);
        }
    }
}

TEST_CASE("l1_weights domain errors") {
    CHECK_THROWS_AS(l1_weights(0.0, 0.1, 5), std::domain_error);
    CHECK_THROWS_AS(l1_weights(1.1, 0.1, 5), std::domain_error);
    CHECK_THROWS_AS(l1_weights(0.5, 0.0, 5), std::domain_error);
    CHECK_THROWS_AS(l1_weights(0.5, 0.1, 0), std::domain_error);
}

TEST_CASE("caputo of a constant vanishes") {
    const auto s = sample(0.1, 12, [](double) { return 7.0; });
    for (double alpha : {0.3, 0.7, 1.0}) {
        const auto st = l1_weights(alpha, 0.1, 12);
        for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{11}}) {
            CHECK(std::abs(caputo_l1(s, st, n)) < 1e-13);
        }
    }
}

TEST_CASE("alpha = 1 gives the backward difference") {
    const auto s = sample(0.25, 9, [](double t) { return std::sin(3.0 * t) + t * t; });
    const auto st = l1_weights(1.0, 0.25, 9);
    for (std::size_t n = 1; n < 9; ++n) {
        const double bd = (s.values[n] - s.values[n - 1]) / 0.25;
        CHECK(caputo_l1(s, st, n) == doctest::Approx(bd).epsilon(1e-12));
    }
}

TEST_CASE("linear function, alpha = 0.5, t = 1") {
    const auto s = sample(0.1, 11, [](double t) { return t; });
    const auto st = l1_weights(0.5, 0.1, 11);
    CHECK(caputo_l1(s, st, 10) == doctest::Approx(1.0 / specfun::gamma(1.5)).epsilon(1e-10));
    CHECK(caputo_l1(s, st, 10) == doctest::Approx(1.1283791671).epsilon(1e-9));
}

TEST_CASE("affine exactness across alpha and n") {
    const double a = 0.4, b = -1.7, dt = 0.05;
    SampledSeries s;
    s.dt = dt;
    s.values.resize(51);
    for (std::size_t j = 0; j < 51; ++j) {
        s.values[j] = a + b * static_cast<double>(j) * dt;
    }
    for (int ia = 1; ia <= 10; ++ia) {
        const double alpha = 0.1 * ia;
        const auto st = l1_weights(alpha, dt, 51);
        for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{50}}) {
            const double tn = static_cast<double>(n) * dt;
            const double expect =
                b * std::pow(tn, 1.0 - alpha) / specfun::gamma(2.0 - alpha);
            CHECK(std::abs(caputo_l1(s, st, n) - expect) < 1e-10);
        }
    }
}

TEST_CASE("caputo argument validation") {
    const auto s = sample(0.1, 6, [](double t) { return t; });
    const auto st = l1_weights(0.5, 0.1, 6);
    CHECK_THROWS(caputo_l1(s, st, 0));
    CHECK_THROWS(caputo_l1(s, st, 6));
    const auto st_wrong_dt = l1_weights(0.5, 0.2, 6);
    CHECK_THROWS(caputo_l1(s, st_wrong_dt, 3));
    const auto st_short = l1_weights(0.5, 0.1, 2);
    CHECK_THROWS(caputo_l1(s, st_short, 5));
}

TEST_CASE("gradient at alpha = 1 is the backward-difference gradient") {
    const auto s = sample(0.2, 6, [](double t) { return t * t * t; });
    const auto st = l1_weights(1.0, 0.2, 6);
    const auto g = caputo_l1_grad(s, st, 3);
    REQUIRE(g.dvalues.size() == 4);
    CHECK(g.dvalues[3] == doctest::Approx(1.0 / 0.2).epsilon(1e-12));
    CHECK(g.dvalues[2] == doctest::Approx(-1.0 / 0.2).epsilon(1e-12));
    CHECK(std::abs(g.dvalues[0]) < 1e-14);
    CHECK(std::abs(g.dvalues[1]) < 1e-14);
}

TEST_CASE("gradient rows annihilate constants") {
    const auto s = sample(0.3, 10, [](double t) { return std::exp(-t); });
    for (double alpha : {0.4, 0.85, 1.0}) {
        const auto st = l1_weights(alpha, 0.3, 10);
        for (std::size_t n : {std::size_t{1}, std::size_t{4}, std::size_t{9}}) {
            const auto g = caputo_l1_grad(s, st, n);
            double sum = 0.0;
            for (double v : g.dvalues) {
                sum += v;
            }
            CHECK(std::abs(sum) < 1e-12);
        }
    }
}

TEST_CASE("dvalues match the weight expansion") {
    const auto s = sample(0.1, 9, [](double t) { return std::cos(t); });
    const auto st = l1_weights(0.7, 0.1, 9);
    const std::size_t n = 8;
    const auto g = caputo_l1_grad(s, st, n);
    // perturb each node and compare with a finite difference
    for (std::size_t j = 0; j <= n; ++j) {
        SampledSeries sp = s, sm = s;
        const double h = 1e-7;
        sp.values[j] += h;
        sm.values[j] -= h;
        const double fd = (caputo_l1(sp, st, n) - caputo_l1(sm, st, n)) / (2.0 * h);
        CHECK(g.dvalues[j] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("dalpha matches the finite difference in alpha") {
    const auto s = sample(0.1, 9, [](double t) { return t * t; });
    const double alpha = 0.7, h = 1e-6;
    const std::size_t n = 8;
    const auto st = l1_weights(alpha, 0.1, 9);
    const auto g = caputo_l1_grad(s, st, n);
    const double fp = caputo_l1(s, l1_weights(alpha + h, 0.1, 9), n);
    const double fm = caputo_l1(s, l1_weights(alpha - h, 0.1, 9), n);
    const double fd = (fp - fm) / (2.0 * h);
    CHECK(std::abs(g.dalpha - fd) / std::abs(fd) < 1e-5);
}

TEST_CASE("dalpha finite difference across alpha values and dt") {
    const auto s = sample(0.5, 12, [](double t) { return std::sin(t) + 0.1 * t; });
    const double h = 1e-6;
    for (double alpha : {0.55, 0.8, 0.95}) {
        const auto st = l1_weights(alpha, 0.5, 12);
        for (std::size_t n : {std::size_t{2}, std::size_t{7}, std::size_t{11}}) {
            const auto g = caputo_l1_grad(s, st, n);
            const double fp = caputo_l1(s, l1_weights(alpha + h, 0.5, 12), n);
            const double fm = caputo_l1(s, l1_weights(alpha - h, 0.5, 12), n);
            const double fd = (fp - fm) / (2.0 * h);
            CHECK(std::abs(g.dalpha - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}
