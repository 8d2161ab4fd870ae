#include "letc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "letc/errors.hpp"
#include "letc/estimator.hpp"

namespace letc {

Matrix estimate_sigma_star(const ModelParams& theta_true, FeatureSampler& sampler,
                           long n_samples, Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("estimate_sigma_star: n_samples < 1");
    if (sampler.dim() != theta_true.dim())
        throw std::invalid_argument("estimate_sigma_star: dimension mismatch");
    const std::size_t m = 2 * theta_true.dim();
    Matrix acc(m, m);
    const double w = 1.0 / static_cast<double>(n_samples);
    for (long i = 0; i < n_samples; ++i) {
        const Vector x = sampler.sample(rng);
        double pstar;
        try {
            pstar = optimal_price(theta_true, x);
        } catch (const DegenerateSlope&) {
            throw DegenerateSlope("estimate_sigma_star: degenerate slope at sample " +
                                  std::to_string(i));
        }
        acc = outer_accumulate(acc, augment(x, pstar), w);
    }
    return acc;
}

SpectrumSummary make_spectrum_summary(const Matrix& sigma_star, const ModelParams& theta_true,
                                      long sample_count) {
    const SymmetricEigen eig = symmetric_eigen(sigma_star);
    SpectrumSummary s;
    s.eigenvalues = eig.eigenvalues;
    const double lam1 = s.eigenvalues.empty() ? 0.0 : std::max(s.eigenvalues.front(), 0.0);
    for (double& lam : s.eigenvalues) {
        if (lam < -1e-9 * std::max(lam1, 1.0))
            throw std::invalid_argument("make_spectrum_summary: matrix is not PSD");
        lam = std::max(lam, 0.0);
    }
    s.sample_count = sample_count;
    Vector v = theta_true.alpha;
    for (double b : theta_true.beta) v.push_back(2.0 * b);
    const double nv = norm2(v);
    if (nv > 0.0)
        for (double& e : v) e /= nv;
    s.null_candidate = std::move(v);
    return s;
}

NullSpaceCheck verify_null_space(const Matrix& sigma_star, const ModelParams& theta_true) {
    Vector v = theta_true.alpha;
    for (double b : theta_true.beta) v.push_back(2.0 * b);
    const double nv = norm2(v);
    if (nv == 0.0) throw std::invalid_argument("verify_null_space: zero null candidate");
    for (double& e : v) e /= nv;

    NullSpaceCheck out;
    out.residual = std::fabs(dot(v, matvec(sigma_star, v)));
    const SymmetricEigen eig = symmetric_eigen(sigma_star);
    out.second_smallest =
        eig.eigenvalues.size() >= 2 ? eig.eigenvalues[eig.eigenvalues.size() - 2] : 0.0;
    return out;
}

double degenerate_dimension(const SpectrumSummary& summary, double eta) {
    if (eta < 0.0) throw std::invalid_argument("degenerate_dimension: eta < 0");
    double s = 0.0;
    for (double lam : summary.eigenvalues) {
        if (lam <= 0.0)
            s += 1.0;
        else
            s += std::min(eta * eta / lam, 1.0);
    }
    return s;
}

double singularity(const SpectrumSummary& summary, double eta) {
    const double two_d = static_cast<double>(summary.two_d());
    if (two_d == 0.0) throw std::invalid_argument("singularity: empty spectrum");
    return std::sqrt(degenerate_dimension(summary, eta) / two_d);
}

double snr(double horizon, std::size_t d, double kappa) {
    if (horizon < 3.0) throw std::invalid_argument("snr: horizon must be >= 3");
    if (kappa <= 0.0) throw std::invalid_argument("snr: kappa must be > 0");
    return (std::sqrt(horizon) / std::log(horizon)) /
           (kappa * std::sqrt(2.0 * static_cast<double>(d)));
}

namespace {

// g(eta) = S(eta) - kappa sqrt(2d/T) log(T) / eta^2
double critical_gap(const SpectrumSummary& summary, double horizon, std::size_t d, double kappa,
                    double eta) {
    const double rhs =
        kappa * std::sqrt(2.0 * static_cast<double>(d) / horizon) * std::log(horizon) / (eta * eta);
    return singularity(summary, eta) - rhs;
}

}  // namespace

CriticalSolution solve_critical_eta(const SpectrumSummary& summary, double horizon,
                                    std::size_t d, double kappa, double eta_max) {
    if (horizon < 3.0) throw std::invalid_argument("solve_critical_eta: horizon must be >= 3");
    if (summary.two_d() != 2 * d)
        throw std::invalid_argument("solve_critical_eta: spectrum length != 2d");
    if (eta_max <= 0.0) throw std::invalid_argument("solve_critical_eta: eta_max must be > 0");

    const double lam1 = summary.eigenvalues.empty() ? 0.0 : summary.eigenvalues.front();
    const double lo0 = 1e-8;
    const double hi0 = std::max(eta_max, std::sqrt(std::max(lam1, 0.0)) + 1.0);

    auto g = [&](double eta) { return critical_gap(summary, horizon, d, kappa, eta); };

    if (g(hi0) < 0.0)
        throw NoBracket("solve_critical_eta: inequality infeasible below bracket top");

    CriticalSolution sol;
    sol.bracket_lo = lo0;
    sol.bracket_hi = hi0;

    double lo = lo0, hi = hi0;
    if (g(lo) >= 0.0) {
        // LHS already dominates at the bracket floor: the crossing sits below it.
        hi = lo;
    } else {
        for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
    }
    double eta = hi;  // smallest point satisfying the inequality

    if (eta > eta_max) {
        eta = eta_max;
        sol.capped = true;
    }
    sol.eta_star = eta;
    sol.lhs_value = singularity(summary, eta);
    sol.rhs_value = kappa * std::sqrt(2.0 * static_cast<double>(d) / horizon) *
                    std::log(horizon) / (eta * eta);
    sol.residual = std::fabs(sol.lhs_value - sol.rhs_value);
    sol.d_tilde = degenerate_dimension(summary, eta);
    return sol;
}

bool check_regular(const SpectrumSummary& summary, const CriticalSolution& solution,
                   double horizon, std::size_t d, double kappa, double zeta) {
    if (zeta <= 1.0) throw std::invalid_argument("check_regular: zeta must be > 1");
    const double gap = critical_gap(summary, horizon, d, kappa, solution.eta_star / zeta);
    const double tol = 1e-9 * std::max(1.0, std::fabs(solution.rhs_value));
    return gap < tol;
}

// ---------------------------------------------------------------------------

MomentConditionReport moment_condition_check(const std::vector<FiniteMarginal>& marginals,
                                             double c_mo) {
    MomentConditionReport report;
    report.coordinates.reserve(marginals.size());
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        const FiniteMarginal& m = marginals[i];
        if (m.values.size() != m.probabilities.size() || m.values.empty())
            throw std::invalid_argument("moment_condition_check: bad marginal");
        CoordinateMoments cm;
        for (std::size_t k = 0; k < m.values.size(); ++k) {
            const double v = m.values[k], p = m.probabilities[k];
            cm.mean += p * v;
            cm.second += p * v * v;
            cm.third += p * v * v * v;
            cm.fourth += p * v * v * v * v;
        }
        const bool first = i == 0;
        cm.mean_ok = first || std::fabs(cm.mean) <= 1e-12;
        cm.third_ok = first || std::fabs(cm.third) <= 1e-12;
        cm.second_ok = std::fabs(cm.second - 1.0) <= 1e-12;
        cm.fourth_ok = cm.fourth > 1.0 + c_mo;
        report.all_pass =
            report.all_pass && cm.mean_ok && cm.third_ok && cm.second_ok && cm.fourth_ok;
        report.coordinates.push_back(cm);
    }
    return report;
}

double quadratic_form_second_moment(FeatureSampler& sampler, const Matrix& a, long n_samples,
                                    Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("quadratic_form_second_moment: n < 1");
    double acc = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        const Vector x = sampler.sample(rng);
        const double q = dot(x, matvec(a, x));
        acc += q * q;
    }
    return acc / static_cast<double>(n_samples);
}

double anti_concentration_probe(FeatureSampler& sampler, long n_matrices, long n_samples,
                                Rng& rng) {
    const std::size_t d = sampler.dim();
    double best = std::numeric_limits<double>::infinity();
    for (long m = 0; m < n_matrices; ++m) {
        // random symmetric rank<=4: sum of 4 signed rank-one terms
        Matrix a(d, d);
        for (int r = 0; r < 4; ++r) {
            Vector u(d);
            for (double& e : u) e = rng.normal();
            const double c = rng.normal();
            a = outer_accumulate(a, u, c);
        }
        const double fn = frobenius_norm(a);
        if (fn == 0.0) continue;
        for (double& e : a.data()) e /= fn;
        best = std::min(best, quadratic_form_second_moment(sampler, a, n_samples, rng));
    }
    return best;
}

}  // namespace letc
