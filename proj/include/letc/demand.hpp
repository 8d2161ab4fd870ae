#pragma once

#include <memory>
#include <string>
#include <vector>

#include "letc/linalg.hpp"
#include "letc/rng.hpp"

namespace letc {

constexpr double kSlopeEpsilon = 1e-8;  // |x'beta| below this is a degenerate parabola

/// Demand parameter theta = (alpha, beta), each in R^d.
struct ModelParams {
    Vector alpha;
    Vector beta;

    ModelParams() = default;
    ModelParams(Vector a, Vector b);

    std::size_t dim() const { return alpha.size(); }
    Vector stacked() const;                       // (alpha', beta')' in R^{2d}
    static ModelParams from_stacked(const Vector& theta);
};

struct PriceBounds {
    double lower = 0.0;
    double upper = 1.0;
    double margin = 0.0;  // delta-bar of the interiority assumption

    PriceBounds() = default;
    PriceBounds(double lo, double hi);                 // margin defaults to 0.05*(hi-lo)
    PriceBounds(double lo, double hi, double margin);

    double midpoint() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

double mean_demand(const ModelParams& theta, const Vector& x, double price);
double expected_revenue(const ModelParams& theta, const Vector& x, double price);
// -(x'alpha)/(2 x'beta), unclipped; throws DegenerateSlope when |x'beta| <= kSlopeEpsilon
double optimal_price(const ModelParams& theta, const Vector& x);
double optimal_revenue(const ModelParams& theta, const Vector& x);
double clip(double price, const PriceBounds& bounds);
// r*(x) - r(x, p) = (-x'beta)(p - p*(x))^2, exact for interior optima
double instantaneous_regret(const ModelParams& theta_true, const Vector& x, double price);

// ---------------------------------------------------------------------------
// feature samplers

class FeatureSampler {
public:
    virtual ~FeatureSampler() = default;
    virtual std::size_t dim() const = 0;
    virtual Vector sample(Rng& rng) = 0;
    virtual std::string name() const = 0;
};

// First coordinate constant 1, the rest i.i.d. Uniform[-1,1].
class ConstantPlusUniformSampler final : public FeatureSampler {
public:
    explicit ConstantPlusUniformSampler(std::size_t d);
    std::size_t dim() const override { return d_; }
    Vector sample(Rng& rng) override;
    std::string name() const override { return "constant_plus_uniform"; }

private:
    std::size_t d_;
};

struct FiniteMarginal {
    std::vector<double> values;
    std::vector<double> probabilities;  // sums to 1
};

// Independent-coordinate discrete law: x1 in {1/2 w.p. 4/5, 2 w.p. 1/5},
// xi in {2, -2, 0} w.p. {1/8, 1/8, 3/4} for i >= 2.
class DiscreteExampleSampler final : public FeatureSampler {
public:
    explicit DiscreteExampleSampler(std::size_t d);
    std::size_t dim() const override { return d_; }
    Vector sample(Rng& rng) override;
    std::string name() const override { return "discrete_example"; }

    static std::vector<FiniteMarginal> marginals(std::size_t d);

private:
    std::size_t d_;
};

// Atoms with probabilities over R^d.
class FiniteSupportSampler final : public FeatureSampler {
public:
    FiniteSupportSampler(std::vector<Vector> points, std::vector<double> probabilities);
    std::size_t dim() const override;
    Vector sample(Rng& rng) override;
    std::string name() const override { return "finite_support"; }

    const std::vector<Vector>& points() const { return points_; }
    const std::vector<double>& probabilities() const { return probabilities_; }

private:
    std::vector<Vector> points_;
    std::vector<double> probabilities_;
};

// ---------------------------------------------------------------------------
// noise and environment

struct NoiseModel {
    enum class Kind { GaussianShock, PoissonDemand };
    Kind kind = Kind::GaussianShock;
    double sigma = 0.0;

    static NoiseModel gaussian(double sigma);
    static NoiseModel poisson();
};

struct Interaction {
    Vector x;
    double price = 0.0;
    double demand = 0.0;
    long step = 0;  // 1-based
};

// One online pricing process: per-trial object, single-threaded.
class Environment {
public:
    Environment(ModelParams theta_true, PriceBounds bounds, NoiseModel noise,
                std::shared_ptr<FeatureSampler> sampler);

    const ModelParams& theta_true() const { return theta_; }
    const PriceBounds& bounds() const { return bounds_; }
    const NoiseModel& noise() const { return noise_; }
    std::size_t dim() const { return theta_.dim(); }
    long step_count() const { return t_; }
    long clamped_poisson_count() const { return clamped_poisson_; }

    // Split protocol for policies that price on the observed context.
    Vector next_context(Rng& rng);
    Interaction realize(const Vector& x, double price, Rng& rng);

    // Price-first convenience (burn-in style: price chosen before the context).
    Interaction step(double price, Rng& rng);

private:
    ModelParams theta_;
    PriceBounds bounds_;
    NoiseModel noise_;
    std::shared_ptr<FeatureSampler> sampler_;
    long t_ = 0;
    long clamped_poisson_ = 0;
};

// Sign-corrected ground truth of the simulation protocol: alpha = e1 + (e2+e3)/5,
// beta = -e1 + (e2+e3)/5 (d >= 4; for d < 4 the pattern truncates).
ModelParams paper_sim_theta(std::size_t d);

// d=2 instance with constant optimal price 1/2 (alpha = -beta): singular Sigma*.
ModelParams singular_constant_pstar_theta();

// theta of the discrete example: alpha = e1 + e2/8, beta = -e1 + e2/8.
ModelParams discrete_example_theta(std::size_t d);

}  // namespace letc
