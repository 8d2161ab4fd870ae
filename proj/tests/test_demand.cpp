#include <cmath>
#include <memory>

#include "doctest.h"
#include "letc/demand.hpp"
#include "letc/errors.hpp"

using namespace letc;

TEST_SUITE("demand") {

TEST_CASE("mean_demand") {
    const ModelParams theta({1, 0}, {-1, 0});
    CHECK(mean_demand(theta, {1, 0}, 0.5) == doctest::Approx(0.5));
    CHECK(mean_demand(theta, {1, 0}, 0.0) == doctest::Approx(1.0));  // intercept only
    const ModelParams sim = paper_sim_theta(4);
    CHECK(mean_demand(sim, {1, 0, 0, 0}, 0.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mean_demand(theta, {1, 0, 0}, 0.5), std::invalid_argument);
}

TEST_CASE("expected_revenue") {
    const ModelParams theta({1, 0}, {-1, 0});
    const Vector x{1, 0};
    CHECK(expected_revenue(theta, x, 0.5) == doctest::Approx(0.25));
    CHECK(expected_revenue(theta, x, 0.0) == 0.0);
    const double pstar = optimal_price(theta, x);
    CHECK(expected_revenue(theta, x, pstar) == doctest::Approx(optimal_revenue(theta, x)));
}

TEST_CASE("optimal_price") {
    CHECK(optimal_price(ModelParams({1}, {-1}), {1}) == doctest::Approx(0.5));
    CHECK(optimal_price(ModelParams({1}, {-2}), {1}) == doctest::Approx(0.25));
    CHECK_THROWS_AS(optimal_price(ModelParams({1}, {0}), {1}), DegenerateSlope);
}

TEST_CASE("discrete-example instance keeps intercept and slope in [1/4, 3]") {
    const std::size_t d = 6;
    const ModelParams theta = discrete_example_theta(d);
    DiscreteExampleSampler sampler(d);
    Rng rng(333);
    for (int i = 0; i < 10000; ++i) {
        const Vector x = sampler.sample(rng);
        const double intercept = dot(x, theta.alpha);
        const double neg_slope = -dot(x, theta.beta);
        CHECK(intercept >= 0.25);
        CHECK(intercept <= 3.0);
        CHECK(neg_slope >= 0.25);
        CHECK(neg_slope <= 3.0);
    }
}

TEST_CASE("optimal_revenue") {
    CHECK(optimal_revenue(ModelParams({1}, {-1}), {1}) == doctest::Approx(0.25));
    CHECK(optimal_revenue(ModelParams({2}, {-1}), {1}) == doctest::Approx(1.0));
    // scaling alpha by c scales the peak revenue by c^2
    const double base = optimal_revenue(ModelParams({1.3}, {-0.7}), {1});
    const double scaled = optimal_revenue(ModelParams({3 * 1.3}, {-0.7}), {1});
    CHECK(scaled == doctest::Approx(9.0 * base));
}

TEST_CASE("clip") {
    const PriceBounds bounds(0.0, 1.0);
    CHECK(clip(1.5, bounds) == 1.0);
    CHECK(clip(-0.2, bounds) == 0.0);
    CHECK(clip(0.7, bounds) == 0.7);
    // idempotent and always feasible
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform(-3.0, 3.0);
        const double c = clip(p, bounds);
        CHECK(clip(c, bounds) == c);
        CHECK(c >= bounds.lower);
        CHECK(c <= bounds.upper);
    }
}

TEST_CASE("price bounds validation") {
    CHECK_THROWS_AS(PriceBounds(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PriceBounds(-0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PriceBounds(0.0, 1.0, 0.6), std::invalid_argument);
    CHECK(PriceBounds(0.0, 2.0).margin == doctest::Approx(0.1));
}

TEST_CASE("step with zero noise returns the mean demand exactly") {
    Environment env(paper_sim_theta(4), PriceBounds(0, 2), NoiseModel::gaussian(0.0),
                    std::make_shared<ConstantPlusUniformSampler>(4));
    Rng rng(9);
    const Interaction it = env.step(0.7, rng);
    CHECK(it.demand == mean_demand(env.theta_true(), it.x, 0.7));
    CHECK(it.step == 1);
    CHECK_THROWS_AS(env.step(3.0, rng), std::invalid_argument);
}

TEST_CASE("poisson demand matches the mean at law-of-large-numbers scale") {
    // fixed (x, p) via a single-atom sampler
    auto sampler = std::make_shared<FiniteSupportSampler>(
        std::vector<Vector>{{1.0, 0.5}}, std::vector<double>{1.0});
    Environment env(ModelParams({5, 1}, {-1, 0}), PriceBounds(0, 2), NoiseModel::poisson(),
                    std::move(sampler));
    Rng rng(4242);
    const long n = 100000;
    double total = 0.0;
    for (long i = 0; i < n; ++i) total += env.step(1.0, rng).demand;
    const double mean = mean_demand(env.theta_true(), {1.0, 0.5}, 1.0);  // 4.5
    const double tol = 3.0 * std::sqrt(mean / n);
    CHECK(std::fabs(total / n - mean) <= tol);
}

TEST_CASE("same seed reproduces the interaction stream") {
    for (auto kind : {NoiseModel::gaussian(0.3), NoiseModel::poisson()}) {
        Environment env1(paper_sim_theta(4), PriceBounds(0, 2), kind,
                         std::make_shared<ConstantPlusUniformSampler>(4));
        Environment env2(paper_sim_theta(4), PriceBounds(0, 2), kind,
                         std::make_shared<ConstantPlusUniformSampler>(4));
        Rng r1(77), r2(77);
        for (int i = 0; i < 50; ++i) {
            const Interaction a = env1.step(1.0, r1);
            const Interaction b = env2.step(1.0, r2);
            CHECK(a.demand == b.demand);
            CHECK(a.x == b.x);
        }
    }
}

TEST_CASE("negative poisson mean clamps to zero and counts") {
    auto sampler = std::make_shared<FiniteSupportSampler>(
        std::vector<Vector>{{1.0}}, std::vector<double>{1.0});
    Environment env(ModelParams({0.5}, {-1.0}), PriceBounds(0, 2), NoiseModel::poisson(),
                    std::move(sampler));
    Rng rng(3);
    const Interaction it = env.step(2.0, rng);  // mean = 0.5 - 2 = -1.5
    CHECK(it.demand == 0.0);
    CHECK(env.clamped_poisson_count() == 1);
}

TEST_CASE("instantaneous_regret") {
    const ModelParams theta({1}, {-1});
    const Vector x{1};
    const double pstar = optimal_price(theta, x);
    CHECK(instantaneous_regret(theta, x, pstar) == doctest::Approx(0.0));
    CHECK(instantaneous_regret(theta, x, pstar + 0.1) == doctest::Approx(0.01));

    // quadratic form equals the revenue difference, any price
    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        const ModelParams t({rng.uniform(0.5, 2.0), rng.uniform(-0.3, 0.3)},
                            {-rng.uniform(0.5, 2.0), rng.uniform(-0.3, 0.3)});
        const Vector xi{1.0, rng.uniform(-1.0, 1.0)};
        const double p = rng.uniform(0.0, 2.0);
        const double direct = optimal_revenue(t, xi) - expected_revenue(t, xi, p);
        CHECK(std::fabs(instantaneous_regret(t, xi, p) - direct) <= 1e-10);
        CHECK(instantaneous_regret(t, xi, p) >= -1e-12);
    }
}

TEST_CASE("revenue is concave in price when the slope is negative") {
    Rng rng(31);
    const ModelParams theta = paper_sim_theta(4);
    ConstantPlusUniformSampler sampler(4);
    for (int i = 0; i < 500; ++i) {
        const Vector x = sampler.sample(rng);
        const double p1 = rng.uniform(0.0, 2.0), p2 = rng.uniform(0.0, 2.0);
        const double t = rng.uniform01();
        const double lhs = expected_revenue(theta, x, t * p1 + (1 - t) * p2);
        const double rhs = t * expected_revenue(theta, x, p1) + (1 - t) * expected_revenue(theta, x, p2);
        CHECK(lhs >= rhs - 1e-12);
    }
}

TEST_CASE("discrete-example marginals stay inside 3-sigma binomial bands") {
    const std::size_t d = 3;
    DiscreteExampleSampler sampler(d);
    Rng rng(555);
    const long n = 100000;
    long first_high = 0, rest_two = 0, rest_minus = 0, rest_zero = 0;
    for (long i = 0; i < n; ++i) {
        const Vector x = sampler.sample(rng);
        first_high += x[0] == 2.0;
        rest_two += x[1] == 2.0;
        rest_minus += x[1] == -2.0;
        rest_zero += x[1] == 0.0;
    }
    auto band = [n](double p) { return 3.0 * std::sqrt(p * (1 - p) / n); };
    CHECK(std::fabs(first_high / double(n) - 0.2) <= band(0.2));
    CHECK(std::fabs(rest_two / double(n) - 0.125) <= band(0.125));
    CHECK(std::fabs(rest_minus / double(n) - 0.125) <= band(0.125));
    CHECK(std::fabs(rest_zero / double(n) - 0.75) <= band(0.75));
}

TEST_CASE("ground-truth instance satisfies the interiority ranges empirically") {
    const ModelParams theta = paper_sim_theta(8);
    ConstantPlusUniformSampler sampler(8);
    Rng rng(987);
    const PriceBounds bounds(0, 2);
    for (int i = 0; i < 5000; ++i) {
        const Vector x = sampler.sample(rng);
        const double intercept = dot(x, theta.alpha);
        const double neg_slope = -dot(x, theta.beta);
        CHECK(intercept >= 0.6 - 1e-12);
        CHECK(neg_slope >= 0.6 - 1e-12);
        const double pstar = optimal_price(theta, x);
        CHECK(pstar >= bounds.lower + bounds.margin);
        CHECK(pstar <= bounds.upper - bounds.margin);
    }
}

}  // TEST_SUITE
