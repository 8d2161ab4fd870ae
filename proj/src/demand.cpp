#include "letc/demand.hpp"

#include <cmath>
#include <stdexcept>

#include "letc/errors.hpp"

namespace letc {

namespace {

void check_finite(const Vector& v, const char* who) {
    for (double e : v)
        if (!std::isfinite(e)) throw std::invalid_argument(std::string(who) + ": non-finite entry");
}

}  // namespace

ModelParams::ModelParams(Vector a, Vector b) : alpha(std::move(a)), beta(std::move(b)) {
    if (alpha.size() != beta.size())
        throw std::invalid_argument("ModelParams: alpha/beta dimension mismatch");
    check_finite(alpha, "ModelParams.alpha");
    check_finite(beta, "ModelParams.beta");
}

Vector ModelParams::stacked() const {
    Vector theta(alpha);
    theta.insert(theta.end(), beta.begin(), beta.end());
    return theta;
}

ModelParams ModelParams::from_stacked(const Vector& theta) {
    if (theta.size() % 2 != 0) throw std::invalid_argument("from_stacked: odd length");
    const std::size_t d = theta.size() / 2;
    return ModelParams(Vector(theta.begin(), theta.begin() + d),
                       Vector(theta.begin() + d, theta.end()));
}

PriceBounds::PriceBounds(double lo, double hi) : PriceBounds(lo, hi, 0.05 * (hi - lo)) {}

PriceBounds::PriceBounds(double lo, double hi, double m) : lower(lo), upper(hi), margin(m) {
    if (!(lower >= 0.0) || !(lower < upper)) throw std::invalid_argument("PriceBounds: need 0 <= lower < upper");
    if (!(margin >= 0.0) || !(2.0 * margin < upper - lower))
        throw std::invalid_argument("PriceBounds: need margin >= 0 and 2*margin < upper-lower");
}

double mean_demand(const ModelParams& theta, const Vector& x, double price) {
    if (x.size() != theta.dim()) throw std::invalid_argument("mean_demand: dimension mismatch");
    return dot(x, theta.alpha) + price * dot(x, theta.beta);
}

double expected_revenue(const ModelParams& theta, const Vector& x, double price) {
    return price * mean_demand(theta, x, price);
}

double optimal_price(const ModelParams& theta, const Vector& x) {
    if (x.size() != theta.dim()) throw std::invalid_argument("optimal_price: dimension mismatch");
    const double slope = dot(x, theta.beta);
    if (std::fabs(slope) <= kSlopeEpsilon)
        throw DegenerateSlope("optimal_price: |x'beta| below tolerance");
    return -dot(x, theta.alpha) / (2.0 * slope);
}

double optimal_revenue(const ModelParams& theta, const Vector& x) {
    const double slope = dot(x, theta.beta);
    if (std::fabs(slope) <= kSlopeEpsilon)
        throw DegenerateSlope("optimal_revenue: |x'beta| below tolerance");
    const double intercept = dot(x, theta.alpha);
    return -intercept * intercept / (4.0 * slope);
}

double clip(double price, const PriceBounds& bounds) {
    return std::max(std::min(price, bounds.upper), bounds.lower);
}

double instantaneous_regret(const ModelParams& theta_true, const Vector& x, double price) {
    const double gap = price - optimal_price(theta_true, x);
    return -dot(x, theta_true.beta) * gap * gap;
}

// ---------------------------------------------------------------------------

ConstantPlusUniformSampler::ConstantPlusUniformSampler(std::size_t d) : d_(d) {
    if (d == 0) throw std::invalid_argument("ConstantPlusUniformSampler: d must be positive");
}

Vector ConstantPlusUniformSampler::sample(Rng& rng) {
    Vector x(d_);
    x[0] = 1.0;
    for (std::size_t i = 1; i < d_; ++i) x[i] = rng.uniform(-1.0, 1.0);
    return x;
}

DiscreteExampleSampler::DiscreteExampleSampler(std::size_t d) : d_(d) {
    if (d == 0) throw std::invalid_argument("DiscreteExampleSampler: d must be positive");
}

Vector DiscreteExampleSampler::sample(Rng& rng) {
    Vector x(d_);
    x[0] = rng.uniform01() < 0.8 ? 0.5 : 2.0;
    for (std::size_t i = 1; i < d_; ++i) {
        const double u = rng.uniform01();
        x[i] = u < 0.125 ? 2.0 : (u < 0.25 ? -2.0 : 0.0);
    }
    return x;
}

std::vector<FiniteMarginal> DiscreteExampleSampler::marginals(std::size_t d) {
    std::vector<FiniteMarginal> out(d);
    out[0] = {{0.5, 2.0}, {0.8, 0.2}};
    for (std::size_t i = 1; i < d; ++i) out[i] = {{2.0, -2.0, 0.0}, {0.125, 0.125, 0.75}};
    return out;
}

FiniteSupportSampler::FiniteSupportSampler(std::vector<Vector> points,
                                           std::vector<double> probabilities)
    : points_(std::move(points)), probabilities_(std::move(probabilities)) {
    if (points_.empty() || points_.size() != probabilities_.size())
        throw std::invalid_argument("FiniteSupportSampler: points/probabilities mismatch");
    double total = 0.0;
    for (double p : probabilities_) {
        if (p < 0.0) throw std::invalid_argument("FiniteSupportSampler: negative probability");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("FiniteSupportSampler: probabilities must sum to 1");
    for (const auto& pt : points_)
        if (pt.size() != points_.front().size())
            throw std::invalid_argument("FiniteSupportSampler: inconsistent dimensions");
}

std::size_t FiniteSupportSampler::dim() const { return points_.front().size(); }

Vector FiniteSupportSampler::sample(Rng& rng) {
    double u = rng.uniform01();
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (u < probabilities_[i]) return points_[i];
        u -= probabilities_[i];
    }
    return points_.back();
}

// ---------------------------------------------------------------------------

NoiseModel NoiseModel::gaussian(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("NoiseModel: sigma must be >= 0");
    return {Kind::GaussianShock, sigma};
}

NoiseModel NoiseModel::poisson() { return {Kind::PoissonDemand, 0.0}; }

Environment::Environment(ModelParams theta_true, PriceBounds bounds, NoiseModel noise,
                         std::shared_ptr<FeatureSampler> sampler)
    : theta_(std::move(theta_true)),
      bounds_(bounds),
      noise_(noise),
      sampler_(std::move(sampler)) {
    if (!sampler_) throw std::invalid_argument("Environment: null sampler");
    if (sampler_->dim() != theta_.dim())
        throw std::invalid_argument("Environment: sampler/theta dimension mismatch");
}

Vector Environment::next_context(Rng& rng) { return sampler_->sample(rng); }

Interaction Environment::realize(const Vector& x, double price, Rng& rng) {
    if (price < bounds_.lower || price > bounds_.upper)
        throw std::invalid_argument("Environment: price out of bounds");
    const double mean = mean_demand(theta_, x, price);
    double demand = 0.0;
    switch (noise_.kind) {
        case NoiseModel::Kind::GaussianShock:
            demand = mean + (noise_.sigma > 0.0 ? noise_.sigma * rng.normal() : 0.0);
            break;
        case NoiseModel::Kind::PoissonDemand: {
            double lambda = mean;
            if (lambda < 0.0) {
                lambda = 0.0;
                ++clamped_poisson_;
            }
            demand = static_cast<double>(rng.poisson(lambda));
            break;
        }
    }
    ++t_;
    return {x, price, demand, t_};
}

Interaction Environment::step(double price, Rng& rng) {
    Vector x = next_context(rng);
    return realize(x, price, rng);
}

// ---------------------------------------------------------------------------

ModelParams paper_sim_theta(std::size_t d) {
    Vector alpha(d, 0.0), beta(d, 0.0);
    alpha[0] = 1.0;
    beta[0] = -1.0;
    for (std::size_t i = 1; i < std::min<std::size_t>(d, 3); ++i) {
        alpha[i] = 0.2;
        beta[i] = 0.2;
    }
    return ModelParams(std::move(alpha), std::move(beta));
}

ModelParams singular_constant_pstar_theta() {
    return ModelParams({1.0, 0.2}, {-1.0, -0.2});
}

ModelParams discrete_example_theta(std::size_t d) {
    Vector alpha(d, 0.0), beta(d, 0.0);
    alpha[0] = 1.0;
    beta[0] = -1.0;
    if (d > 1) {
        alpha[1] = 0.125;
        beta[1] = 0.125;
    }
    return ModelParams(std::move(alpha), std::move(beta));
}

}  // namespace letc
