#pragma once

#include "letc/demand.hpp"
#include "letc/linalg.hpp"

namespace letc {

// Running second-moment statistics of the augmented design z = (x, x*p).
// gram and moment are kept as means over the count, matching the loss scaling.
struct DesignStats {
    Matrix gram;    // (1/n) sum z z'
    Vector moment;  // (1/n) sum z D
    long count = 0;

    DesignStats() = default;
    explicit DesignStats(std::size_t d)
        : gram(2 * d, 2 * d), moment(2 * d, 0.0), count(0) {}

    std::size_t augmented_dim() const { return moment.size(); }
};

// z = (x, x*p) in R^{2d}
Vector augment(const Vector& x, double price);

DesignStats accumulate(DesignStats stats, const Interaction& interaction);

struct OlsFit {
    ModelParams params;
    bool jitter_applied = false;
};

// theta solving gram * theta = moment through solve_spd; propagates SingularSystem.
OlsFit ols_fit(const DesignStats& stats);

struct PriceDecision {
    double price = 0.0;
    bool fallback = false;  // degenerate estimated slope, midpoint used
    bool clipped = false;
};

// clip(optimal_price(theta_hat, x)) with midpoint fallback on a degenerate slope.
PriceDecision price_from_estimate(const ModelParams& theta_hat, const Vector& x,
                                  const PriceBounds& bounds);

struct GramDiagnostics {
    Vector eigenvalues;     // sorted non-increasing, clamped at 0
    double trace_inverse = 0.0;  // +inf marker on rank deficiency
    double min_eig = 0.0;
};

GramDiagnostics gram_diagnostics(const DesignStats& stats);

}  // namespace letc
