#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "letc/errors.hpp"
#include "letc/estimator.hpp"

using namespace letc;

namespace {

DesignStats binary_stage1(const ModelParams& theta, std::size_t d, long t1, double sigma,
                          const PriceBounds& bounds, Rng& rng) {
    Environment env(theta, bounds, NoiseModel::gaussian(sigma),
                    std::make_shared<ConstantPlusUniformSampler>(d));
    DesignStats stats(d);
    for (long t = 0; t < t1; ++t)
        stats = accumulate(stats, env.step(rng.coin() ? bounds.upper : bounds.lower, rng));
    return stats;
}

double theta_sq_error(const ModelParams& a, const ModelParams& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += (a.alpha[i] - b.alpha[i]) * (a.alpha[i] - b.alpha[i]);
        s += (a.beta[i] - b.beta[i]) * (a.beta[i] - b.beta[i]);
    }
    return s;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("augment") {
    CHECK(augment({1, 2}, 3) == Vector{1, 2, 3, 6});
    CHECK(augment({1, 2}, 0) == Vector{1, 2, 0, 0});
    CHECK(augment({0, 0}, 5) == Vector{0, 0, 0, 0});
}

TEST_CASE("accumulate single interaction") {
    DesignStats stats(1);
    CHECK(stats.count == 0);
    CHECK(stats.gram(0, 0) == 0.0);
    stats = accumulate(stats, Interaction{{1.0}, 2.0, 5.0, 1});
    CHECK(stats.count == 1);
    CHECK(stats.gram(0, 0) == doctest::Approx(1.0));
    CHECK(stats.gram(0, 1) == doctest::Approx(2.0));
    CHECK(stats.gram(1, 0) == doctest::Approx(2.0));
    CHECK(stats.gram(1, 1) == doctest::Approx(4.0));
    CHECK(stats.moment[0] == doctest::Approx(5.0));
    CHECK(stats.moment[1] == doctest::Approx(10.0));
}

TEST_CASE("accumulate is order-independent up to rounding") {
    Rng rng(17);
    std::vector<Interaction> batch;
    for (long t = 0; t < 64; ++t)
        batch.push_back(Interaction{{1.0, rng.uniform(-1, 1)}, rng.uniform(0, 2),
                                    rng.normal(1.0, 0.5), t + 1});
    DesignStats fwd(2), rev(2);
    for (const auto& it : batch) fwd = accumulate(fwd, it);
    for (auto it = batch.rbegin(); it != batch.rend(); ++it) rev = accumulate(rev, *it);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::fabs(fwd.moment[i] - rev.moment[i]) <= 1e-12);
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(std::fabs(fwd.gram(i, j) - rev.gram(i, j)) <= 1e-12);
    }
}

TEST_CASE("ols_fit exact 2x2") {
    DesignStats stats(1);
    stats = accumulate(stats, Interaction{{1.0}, 0.0, 2.0, 1});
    stats = accumulate(stats, Interaction{{1.0}, 1.0, 1.0, 2});
    const OlsFit fit = ols_fit(stats);
    CHECK(fit.params.alpha[0] == doctest::Approx(2.0));
    CHECK(fit.params.beta[0] == doctest::Approx(-1.0));
}

TEST_CASE("ols_fit interpolates noiseless data") {
    Rng rng(29);
    const ModelParams truth({0.8, -0.1, 0.4}, {-1.1, 0.2, 0.05});
    DesignStats stats(3);
    for (int t = 0; t < 40; ++t) {
        Vector x{1.0, rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double p = rng.uniform(0, 2);
        stats = accumulate(stats, Interaction{x, p, mean_demand(truth, x, p), t + 1});
    }
    const OlsFit fit = ols_fit(stats);
    CHECK(theta_sq_error(fit.params, truth) <= 1e-18);

    // normal-equation residual bound
    const Vector lhs = matvec(stats.gram, fit.params.stacked());
    double rn = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i)
        rn += (lhs[i] - stats.moment[i]) * (lhs[i] - stats.moment[i]);
    rn = std::sqrt(rn);
    CHECK(rn <= 1e-8 * (frobenius_norm(stats.gram) * norm2(fit.params.stacked()) +
                        norm2(stats.moment)));
}

TEST_CASE("ols_fit rejects a price-collinear design") {
    Rng rng(31);
    DesignStats stats(2);
    for (int t = 0; t < 3; ++t) {  // d+1 distinct contexts, identical price
        Vector x{1.0, rng.uniform(-1, 1)};
        stats = accumulate(stats, Interaction{x, 1.3, rng.normal(), t + 1});
    }
    CHECK_THROWS_AS(ols_fit(stats), SingularSystem);
    CHECK_THROWS_AS(ols_fit(DesignStats(2)), SingularSystem);
}

TEST_CASE("price_from_estimate") {
    const PriceBounds bounds(0, 1);
    const ModelParams truth({1}, {-1});
    const PriceDecision exact = price_from_estimate(truth, {1}, bounds);
    CHECK(exact.price == doctest::Approx(0.5));
    CHECK_FALSE(exact.fallback);
    CHECK_FALSE(exact.clipped);

    const PriceDecision degenerate = price_from_estimate(ModelParams({1}, {0}), {1}, bounds);
    CHECK(degenerate.price == doctest::Approx(0.5));  // midpoint
    CHECK(degenerate.fallback);

    const PriceDecision clipped = price_from_estimate(ModelParams({2.8}, {-1}), {1}, bounds);
    CHECK(clipped.price == 1.0);  // unclipped estimate 1.4
    CHECK(clipped.clipped);
}

TEST_CASE("gram_diagnostics") {
    DesignStats id(2);
    id.gram = Matrix::identity(4);
    id.count = 1;
    const GramDiagnostics diag = gram_diagnostics(id);
    CHECK(diag.trace_inverse == doctest::Approx(4.0));
    CHECK(diag.min_eig == doctest::Approx(1.0));

    DesignStats deficient(1);
    deficient.gram = outer_accumulate(Matrix(2, 2), {1.0, 1.0}, 1.0);
    deficient.count = 1;
    CHECK(std::isinf(gram_diagnostics(deficient).trace_inverse));
}

TEST_CASE("stage-1 trace of inverse is stable across burn-in lengths") {
    const ModelParams theta = paper_sim_theta(4);
    const PriceBounds bounds(0, 2);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        Rng rng(seed);
        const double ti2000 =
            gram_diagnostics(binary_stage1(theta, 4, 2000, 0.01, bounds, rng)).trace_inverse;
        const double ti4000 =
            gram_diagnostics(binary_stage1(theta, 4, 4000, 0.01, bounds, rng)).trace_inverse;
        CHECK(std::isfinite(ti2000));
        CHECK(std::isfinite(ti4000));
        CHECK(ti2000 < 10.0 * ti4000);
        CHECK(ti4000 < 10.0 * ti2000);
    }
}

TEST_CASE("stage-1 error halves when the burn-in doubles") {
    const ModelParams theta = paper_sim_theta(4);
    const PriceBounds bounds(0, 2);
    double err2000 = 0.0, err4000 = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(1000 + s);
        err2000 += theta_sq_error(ols_fit(binary_stage1(theta, 4, 2000, 0.01, bounds, rng)).params,
                                  theta);
        err4000 += theta_sq_error(ols_fit(binary_stage1(theta, 4, 4000, 0.01, bounds, rng)).params,
                                  theta);
    }
    err2000 /= seeds;
    err4000 /= seeds;
    CHECK(err4000 >= 0.3 * err2000);
    CHECK(err4000 <= 0.7 * err2000);
}

}  // TEST_SUITE
