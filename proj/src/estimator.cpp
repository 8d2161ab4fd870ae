#include "letc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "letc/errors.hpp"

namespace letc {

Vector augment(const Vector& x, double price) {
    Vector z(2 * x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = x[i];
        z[x.size() + i] = x[i] * price;
    }
    return z;
}

DesignStats accumulate(DesignStats stats, const Interaction& interaction) {
    const Vector z = augment(interaction.x, interaction.price);
    if (stats.augmented_dim() == 0) stats = DesignStats(interaction.x.size());
    if (stats.augmented_dim() != z.size())
        throw std::invalid_argument("accumulate: dimension mismatch");

    const double n_old = static_cast<double>(stats.count);
    const double n_new = n_old + 1.0;
    const double keep = n_old / n_new;
    const double add = 1.0 / n_new;

    for (double& v : stats.gram.data()) v *= keep;
    stats.gram = outer_accumulate(stats.gram, z, add);
    for (std::size_t i = 0; i < z.size(); ++i)
        stats.moment[i] = keep * stats.moment[i] + add * z[i] * interaction.demand;
    stats.count += 1;
    return stats;
}

OlsFit ols_fit(const DesignStats& stats) {
    if (stats.count == 0) throw SingularSystem("ols_fit: empty design");
    SpdSolution sol = solve_spd(stats.gram, stats.moment);
    return {ModelParams::from_stacked(sol.x), sol.jitter_applied};
}

PriceDecision price_from_estimate(const ModelParams& theta_hat, const Vector& x,
                                  const PriceBounds& bounds) {
    PriceDecision out;
    double raw;
    try {
        raw = optimal_price(theta_hat, x);
    } catch (const DegenerateSlope&) {
        out.fallback = true;
        raw = bounds.midpoint();
    }
    out.price = clip(raw, bounds);
    out.clipped = out.price != raw;
    return out;
}

GramDiagnostics gram_diagnostics(const DesignStats& stats) {
    const SymmetricEigen eig = symmetric_eigen(stats.gram);
    GramDiagnostics diag;
    diag.eigenvalues = eig.eigenvalues;
    const double lam1 = diag.eigenvalues.empty() ? 0.0 : std::max(diag.eigenvalues.front(), 0.0);
    for (double& lam : diag.eigenvalues) {
        if (lam < 0.0 && lam >= -1e-9 * std::max(lam1, 1.0)) lam = 0.0;
        lam = std::max(lam, 0.0);
    }
    SymmetricEigen clamped = eig;
    clamped.eigenvalues = diag.eigenvalues;
    diag.trace_inverse = trace_inverse(clamped, 0.0);
    diag.min_eig = diag.eigenvalues.empty() ? 0.0 : diag.eigenvalues.back();
    return diag;
}

}  // namespace letc
