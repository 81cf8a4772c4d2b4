#include <cmath>
#include <vector>

#include "doctest.h"
#include "smoothkit/simulate.hpp"
#include "test_models.hpp"

using namespace smoothkit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("noiseless degenerate system") {
    // b = 0, sigma = 0, deterministic X0: states frozen, dY = c x h.
    ModelSpec m = testkit::scalar_model(0, 0, 2.0, 0, 1.5, 0);
    const TimeGrid g{1.0, 10};
    const SimulationOutput sim = simulate(m, g, 3);
    for (int i = 0; i <= g.n; ++i) CHECK(sim.states[i](0) == 1.5);
    for (int i = 0; i < g.n; ++i)
        CHECK(sim.observations.increments(i, 0) ==
              doctest::Approx(2.0 * 1.5 * g.h()).epsilon(1e-15));
}

TEST_CASE("same seed reproduces the simulation bit for bit") {
    const ModelSpec m = testkit::scalar_benchmark();
    const TimeGrid g{1.0, 50};
    const SimulationOutput s1 = simulate(m, g, 42);
    const SimulationOutput s2 = simulate(m, g, 42);
    for (int i = 0; i <= g.n; ++i) CHECK(s1.states[i](0) == s2.states[i](0));
    CHECK((s1.observations.increments - s2.observations.increments)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("rng streams") {
    SUBCASE("same stream gives identical draws") {
        RngStream a = rng_stream(42, 0);
        RngStream b = rng_stream(42, 0);
        for (int k = 0; k < 100; ++k) CHECK(a.normal() == b.normal());
    }
    SUBCASE("distinct streams are decorrelated") {
        RngStream a = rng_stream(42, 0);
        RngStream b = rng_stream(42, 1);
        const int n = 10000;
        double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
        for (int k = 0; k < n; ++k) {
            const double x = a.normal();
            const double y = b.normal();
            sx += x; sy += y; sxy += x * y; sxx += x * x; syy += y * y;
        }
        const double corr =
            (sxy / n - sx / n * sy / n) /
            std::sqrt((sxx / n - sx / n * sx / n) *
                      (syy / n - sy / n * sy / n));
        CHECK(std::abs(corr) <= 0.03);
    }
    SUBCASE("sanity") {
        RngStream s = rng_stream(42, 7);
        CHECK(std::isfinite(s.normal()));
    }
}

TEST_CASE("brownian variance of the state increment") {
    // a=0, b=1: Var(X_T - X_0) = T.
    const ModelSpec m = testkit::scalar_model(0, 1, 1, 1, 0, 0);
    const TimeGrid g{1.0, 16};
    const int trials = 100000;
    double s1 = 0, s2 = 0;
    for (int k = 0; k < trials; ++k) {
        const SimulationOutput sim = simulate(m, g, 1000 + k);
        const double d = sim.states[g.n](0) - sim.states[0](0);
        s1 += d;
        s2 += d * d;
    }
    const double mean = s1 / trials;
    const double var = s2 / trials - mean * mean;
    const double se = 1.0 * std::sqrt(2.0 / (trials - 1));
    CHECK(std::abs(var - 1.0) <= 3 * se);
}

TEST_CASE("euler-maruyama weak moments match the prior solves") {
    // Terminal mean within 3 standard errors; terminal variance (c = 0)
    // within 5% of the pure-diffusion covariance solve.
    const ModelSpec m = testkit::scalar_model(-0.5, 1, 0, 1, 1.0, 0.2);
    const TimeGrid g{1.0, 16};
    const int trials = 100000;
    double s1 = 0, s2 = 0;
    for (int k = 0; k < trials; ++k) {
        const SimulationOutput sim = simulate(m, g, 77000 + k);
        const double x = sim.states[g.n](0);
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / trials;
    const double var = s2 / trials - mean * mean;
    const VecSeq prior = prior_mean_path(m, g);
    const MatSeq gamma = solve_gamma_forward(m, g);
    const double se = std::sqrt(var / trials);
    CHECK(std::abs(mean - prior[g.n](0)) <= 3 * se);
    CHECK(std::abs(var - gamma[g.n](0, 0)) <= 0.05 * gamma[g.n](0, 0));
}

TEST_CASE("observation increments without signal are white") {
    // c = 0: dY ~ N(0, sigma sigma^T h), independent across cells.
    const ModelSpec m = testkit::scalar_model(0, 1, 0, 1.3, 0, 1);
    const TimeGrid g{1.0, 100000};
    const SimulationOutput sim = simulate(m, g, 5);
    const double h = g.h();
    double s1 = 0, s2 = 0;
    for (int i = 0; i < g.n; ++i) {
        const double z = sim.observations.increments(i, 0);
        s1 += z;
        s2 += z * z;
    }
    const double var = s2 / g.n - (s1 / g.n) * (s1 / g.n);
    CHECK(std::abs(var - 1.3 * 1.3 * h) <= 0.05 * 1.3 * 1.3 * h);
}
