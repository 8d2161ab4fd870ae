#pragma once

#include <vector>

#include "letc/demand.hpp"
#include "letc/linalg.hpp"

namespace letc {

// Eigenvalues of a 2d x 2d second-moment matrix, sorted non-increasing and
// clamped at zero, plus the instance's (alpha*, 2 beta*) null candidate.
struct SpectrumSummary {
    Vector eigenvalues;
    long sample_count = 0;
    Vector null_candidate;  // normalized (alpha, 2 beta); empty when unknown

    std::size_t two_d() const { return eigenvalues.size(); }
};

struct CriticalSolution {
    double eta_star = 0.0;
    double residual = 0.0;   // |S(eta) - rhs(eta)| at the returned point
    double lhs_value = 0.0;  // S(eta*)
    double rhs_value = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    bool capped = false;     // crossing exceeded eta_max
    double d_tilde = 0.0;    // degenerate dimension at eta_star
};

// Monte Carlo estimate of Sigma* = E[(x, x p*(x)) (x, x p*(x))'].
// Throws DegenerateSlope (with sample index in the message) if any draw has a
// flat revenue parabola.
Matrix estimate_sigma_star(const ModelParams& theta_true, FeatureSampler& sampler,
                           long n_samples, Rng& rng);

SpectrumSummary make_spectrum_summary(const Matrix& sigma_star, const ModelParams& theta_true,
                                      long sample_count);

struct NullSpaceCheck {
    double residual = 0.0;        // |v' Sigma v| for normalized v = (alpha, 2 beta)
    double second_smallest = 0.0; // lambda_{2d-1}
};

NullSpaceCheck verify_null_space(const Matrix& sigma_star, const ModelParams& theta_true);

// d-tilde(eta) = sum_k min{eta^2 / lambda_k, 1}, with min{eta^2/0, 1} = 1.
double degenerate_dimension(const SpectrumSummary& summary, double eta);

// S(eta) = sqrt(d-tilde(eta) / (2d)), non-decreasing in eta.
double singularity(const SpectrumSummary& summary, double eta);

// (sqrt(T)/log T) / (kappa sqrt(2d))
double snr(double horizon, std::size_t d, double kappa);

// Bisection on g(eta) = S(eta) - kappa sqrt(2d/T) log(T) / eta^2 over
// [1e-8, max(eta_max, sqrt(lambda_1)+1)]. The crossing is unique; the result is
// capped at eta_max (flagged) when it lands above. Throws NoBracket when even
// the bracket top fails the inequality.
CriticalSolution solve_critical_eta(const SpectrumSummary& summary, double horizon,
                                    std::size_t d, double kappa, double eta_max);

// true iff eta/zeta no longer satisfies the critical inequality (zeta > 1)
bool check_regular(const SpectrumSummary& summary, const CriticalSolution& solution,
                   double horizon, std::size_t d, double kappa, double zeta);

// ---------------------------------------------------------------------------
// assumption checkers

struct CoordinateMoments {
    double mean = 0.0;
    double second = 0.0;
    double third = 0.0;
    double fourth = 0.0;
    bool mean_ok = true;    // E = 0 (exempt for the first coordinate)
    bool third_ok = true;   // E^3 = 0 (exempt for the first coordinate)
    bool second_ok = true;  // E^2 = 1
    bool fourth_ok = true;  // E^4 > 1 + c_mo
};

struct MomentConditionReport {
    std::vector<CoordinateMoments> coordinates;
    bool all_pass = true;
};

// Exact moments by enumeration over per-coordinate finite supports; the first
// coordinate is exempt from the mean/third-moment conditions.
MomentConditionReport moment_condition_check(const std::vector<FiniteMarginal>& marginals,
                                             double c_mo);

// Monte Carlo estimate of E[(x'Ax)^2] for a fixed symmetric A.
double quadratic_form_second_moment(FeatureSampler& sampler, const Matrix& a, long n_samples,
                                    Rng& rng);

// min over random symmetric rank<=4 unit-Frobenius matrices of the MC estimate
// of E[(x'Ax)^2]; a randomized lower-bound probe for anti-concentration.
double anti_concentration_probe(FeatureSampler& sampler, long n_matrices, long n_samples,
                                Rng& rng);

}  // namespace letc
