#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "letc/demand.hpp"
#include "letc/estimator.hpp"
#include "letc/spectrum.hpp"

namespace letc {

enum class PlannerMode { Simple, General, Experiment, TimeVaryingEta };

std::string planner_mode_name(PlannerMode mode);

struct Plan {
    long t1 = 0;
    long t2 = 0;
    double eta = 0.0;
    long horizon = 0;
    PlannerMode mode = PlannerMode::Simple;
    double d_tilde = 0.0;         // General mode only
    bool horizon_too_short = false;
    bool eta_capped = false;
    bool planner_fallback = false;  // General fell back to Simple (NoBracket)
};

// T1 = ceil(sqrt(T) log T), T2 = ceil(T/(2d)),
// eta = min(c0 sqrt((d/sqrt(T)) log T), eta_max).
Plan plan_simple(long horizon, std::size_t d, double c0 = 1.0, double eta_max = 0.25);

// eta from the critical inequality, d-tilde = d-tilde(eta),
// T1 = ceil(sqrt(d-tilde T) log T), T2 = ceil(d-tilde/(2d) T).
Plan plan_general(long horizon, std::size_t d, const SpectrumSummary& summary, double kappa,
                  double eta_max);

// The simulation-protocol formulas: T1 = ceil(sqrt(T) log T / C1),
// T2 = ceil(T/(d C3)), eta = sqrt(C2 d log T / sqrt(T)).
Plan plan_experiment(long horizon, std::size_t d, double c1 = 10.0, double c2 = 0.005,
                     double c3 = 0.5);

// ---------------------------------------------------------------------------

struct LetcPolicy {
    Plan plan;
    bool pool_stage1 = false;       // include stage-1 data in the stage-2 refit
    bool alternate_stage1 = false;  // deterministic l/u alternation instead of coin flips
};

struct EtcPolicy {
    long t1 = 0;  // commit on the burn-in estimate, no stage 2
};

struct GreedyPolicy {};  // 2d-step binary burn-in, then refit-and-exploit each step

struct StaticPolicy {
    std::function<double(const Vector&)> price;  // clipped before use
    std::string name = "static";
};

struct OraclePolicy {};  // prices at clip(p*(x; theta_true))

using PolicyKind = std::variant<LetcPolicy, EtcPolicy, GreedyPolicy, StaticPolicy, OraclePolicy>;

std::string policy_name(const PolicyKind& policy);

struct RunDiagnostics {
    long singular_fits = 0;
    long fallback_prices = 0;
    long clip_activations = 0;
    long clamped_poisson = 0;
    double design_min_eig = 0.0;  // smallest eigenvalue of the whole-run Gram
};

struct RegretTrace {
    std::vector<double> per_step;
    std::vector<double> cumulative;
    std::vector<double> prices;
    std::vector<double> price_gaps;  // |p_t - p*(x_t)|
    long stage1_end = 0;  // last step of stage 1 (0 when absent)
    long stage2_end = 0;
    std::vector<long> segment_starts;  // doubling runs: 1-based first step per segment
    double oracle_revenue = 0.0;       // sum of r*(x_t) over the run
    std::optional<ModelParams> theta_stage1;  // burn-in estimate, when fitted
    std::optional<ModelParams> theta_final;   // estimate the commit stage priced with
    RunDiagnostics diag;

    double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
    // sum of p_t * f*(x_t, p_t): the oracle total minus what the policy gave up
    double expected_revenue() const { return oracle_revenue - final_regret(); }
};

RegretTrace run(const PolicyKind& policy, Environment& env, long horizon, Rng& rng);

// Restart the policy on horizons t0, 2 t0, 4 t0, ... until total_t is spent
// (final segment truncated); the plan is recomputed per segment.
RegretTrace doubling_run(PlannerMode mode, Environment& env, long total_t, long t0, Rng& rng,
                         double c1 = 10.0, double c2 = 0.005, double c3 = 0.5,
                         double kappa = 1.0, double eta_max = 0.25,
                         const SpectrumSummary* summary = nullptr);

// After a 4d-step binary burn-in, refit on all data each step and price at
// clip(p-hat(x) + eta_t xi), eta_t = min(sqrt(d/t) log T, eta_max).
RegretTrace time_varying_eta_run(Environment& env, long horizon, Rng& rng,
                                 double eta_max = 0.25);

}  // namespace letc
