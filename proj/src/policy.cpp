#include "letc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "letc/errors.hpp"

namespace letc {

std::string planner_mode_name(PlannerMode mode) {
    switch (mode) {
        case PlannerMode::Simple: return "simple";
        case PlannerMode::General: return "general";
        case PlannerMode::Experiment: return "experiment";
        case PlannerMode::TimeVaryingEta: return "timevarying";
    }
    return "unknown";
}

namespace {

// Too short to run as designed: the stages overflow the horizon, or the burn-in
// cannot even identify the 2d parameters.
bool horizon_too_short_for(const Plan& plan, std::size_t d) {
    return plan.t1 + plan.t2 > plan.horizon || plan.t1 < 2 * static_cast<long>(d);
}

}  // namespace

Plan plan_simple(long horizon, std::size_t d, double c0, double eta_max) {
    if (horizon < 3) throw std::invalid_argument("plan_simple: horizon must be >= 3");
    if (d == 0) throw std::invalid_argument("plan_simple: d must be positive");
    const double t = static_cast<double>(horizon);
    Plan plan;
    plan.mode = PlannerMode::Simple;
    plan.horizon = horizon;
    plan.t1 = static_cast<long>(std::ceil(std::sqrt(t) * std::log(t)));
    plan.t2 = static_cast<long>(std::ceil(t / (2.0 * static_cast<double>(d))));
    const double eta_raw = c0 * std::sqrt(static_cast<double>(d) / std::sqrt(t) * std::log(t));
    plan.eta = std::min(eta_raw, eta_max);
    plan.eta_capped = eta_raw > eta_max;
    plan.horizon_too_short = horizon_too_short_for(plan, d);
    return plan;
}

Plan plan_general(long horizon, std::size_t d, const SpectrumSummary& summary, double kappa,
                  double eta_max) {
    if (horizon < 3) throw std::invalid_argument("plan_general: horizon must be >= 3");
    Plan plan;
    plan.mode = PlannerMode::General;
    plan.horizon = horizon;
    try {
        const CriticalSolution sol = solve_critical_eta(summary, static_cast<double>(horizon), d,
                                                        kappa, eta_max);
        plan.eta = sol.eta_star;
        plan.eta_capped = sol.capped;
        plan.d_tilde = degenerate_dimension(summary, plan.eta);
    } catch (const NoBracket&) {
        Plan fallback = plan_simple(horizon, d, 1.0, eta_max);
        fallback.mode = PlannerMode::General;
        fallback.planner_fallback = true;
        return fallback;
    }
    const double t = static_cast<double>(horizon);
    plan.t1 = static_cast<long>(std::ceil(std::sqrt(plan.d_tilde * t) * std::log(t)));
    plan.t2 = static_cast<long>(
        std::ceil(plan.d_tilde / (2.0 * static_cast<double>(d)) * t));
    plan.horizon_too_short = horizon_too_short_for(plan, d);
    return plan;
}

Plan plan_experiment(long horizon, std::size_t d, double c1, double c2, double c3) {
    if (horizon < 3) throw std::invalid_argument("plan_experiment: horizon must be >= 3");
    if (c1 <= 0.0 || c2 <= 0.0 || c3 <= 0.0)
        throw std::invalid_argument("plan_experiment: constants must be > 0");
    const double t = static_cast<double>(horizon);
    Plan plan;
    plan.mode = PlannerMode::Experiment;
    plan.horizon = horizon;
    plan.t1 = static_cast<long>(std::ceil(std::sqrt(t) * std::log(t) / c1));
    plan.t2 = static_cast<long>(std::ceil(t / (static_cast<double>(d) * c3)));
    plan.eta = std::sqrt(c2 * static_cast<double>(d) * std::log(t) / std::sqrt(t));
    plan.horizon_too_short = horizon_too_short_for(plan, d);
    return plan;
}

std::string policy_name(const PolicyKind& policy) {
    struct Visitor {
        std::string operator()(const LetcPolicy&) const { return "letc"; }
        std::string operator()(const EtcPolicy&) const { return "etc"; }
        std::string operator()(const GreedyPolicy&) const { return "greedy"; }
        std::string operator()(const StaticPolicy& p) const { return p.name; }
        std::string operator()(const OraclePolicy&) const { return "oracle"; }
    };
    return std::visit(Visitor{}, policy);
}

namespace {

// Shared bookkeeping for one online run.
class RunRecorder {
public:
    RunRecorder(Environment& env, long horizon)
        : env_(env), full_stats_(env.dim()) {
        trace_.per_step.reserve(horizon);
        trace_.cumulative.reserve(horizon);
    }

    void record(const Interaction& it) {
        const double r = instantaneous_regret(env_.theta_true(), it.x, it.price);
        cum_ += r;
        trace_.per_step.push_back(r);
        trace_.cumulative.push_back(cum_);
        trace_.prices.push_back(it.price);
        trace_.price_gaps.push_back(std::fabs(it.price - optimal_price(env_.theta_true(), it.x)));
        trace_.oracle_revenue += optimal_revenue(env_.theta_true(), it.x);
        full_stats_ = accumulate(full_stats_, it);
    }

    RegretTrace finish() {
        trace_.diag.clamped_poisson = env_.clamped_poisson_count();
        trace_.diag.design_min_eig =
            full_stats_.count > 0 ? gram_diagnostics(full_stats_).min_eig : 0.0;
        return std::move(trace_);
    }

    RegretTrace& trace() { return trace_; }

private:
    Environment& env_;
    DesignStats full_stats_;
    RegretTrace trace_;
    double cum_ = 0.0;
};

double priced_with_diag(const std::optional<ModelParams>& estimate, const Vector& x,
                        const PriceBounds& bounds, RunDiagnostics& diag) {
    if (!estimate) {
        ++diag.fallback_prices;
        return bounds.midpoint();
    }
    const PriceDecision dec = price_from_estimate(*estimate, x, bounds);
    if (dec.fallback) ++diag.fallback_prices;
    if (dec.clipped) ++diag.clip_activations;
    return dec.price;
}

// Raw (unclipped) plug-in price; midpoint on a degenerate or missing estimate.
double raw_plugin_price(const std::optional<ModelParams>& estimate, const Vector& x,
                        const PriceBounds& bounds, RunDiagnostics& diag) {
    if (!estimate) {
        ++diag.fallback_prices;
        return bounds.midpoint();
    }
    try {
        return optimal_price(*estimate, x);
    } catch (const DegenerateSlope&) {
        ++diag.fallback_prices;
        return bounds.midpoint();
    }
}

void fit_into(const DesignStats& stats, std::optional<ModelParams>& estimate,
              RunDiagnostics& diag) {
    try {
        estimate = ols_fit(stats).params;
    } catch (const SingularSystem&) {
        ++diag.singular_fits;  // keep the previous estimate
    }
}

RegretTrace run_letc(const LetcPolicy& policy, Environment& env, long horizon, Rng& rng) {
    const PriceBounds& bounds = env.bounds();
    const Plan& plan = policy.plan;
    RunRecorder rec(env, horizon);
    RunDiagnostics& diag = rec.trace().diag;

    const long t1_end = std::min(plan.t1, horizon);
    const long t2_end = std::min(plan.t1 + plan.t2, horizon);
    rec.trace().stage1_end = t1_end;
    rec.trace().stage2_end = t2_end;

    DesignStats stats1(env.dim());
    DesignStats stats2(env.dim());
    std::optional<ModelParams> theta_tilde;
    std::optional<ModelParams> theta_hat;

    for (long t = 1; t <= t1_end; ++t) {
        const bool high = policy.alternate_stage1 ? (t % 2 == 0) : rng.coin();
        const Interaction it = env.step(high ? bounds.upper : bounds.lower, rng);
        stats1 = accumulate(stats1, it);
        rec.record(it);
    }
    if (t1_end > 0) fit_into(stats1, theta_tilde, diag);

    if (policy.pool_stage1) stats2 = stats1;
    for (long t = t1_end + 1; t <= t2_end; ++t) {
        const Vector x = env.next_context(rng);
        const double base = raw_plugin_price(theta_tilde, x, bounds, diag);
        const double proposed = base + plan.eta * rng.rademacher();
        const double p = clip(proposed, bounds);
        if (p != proposed) ++diag.clip_activations;
        const Interaction it = env.realize(x, p, rng);
        stats2 = accumulate(stats2, it);
        rec.record(it);
    }
    if (t2_end > t1_end) {
        theta_hat = theta_tilde;
        fit_into(stats2, theta_hat, diag);
    } else {
        theta_hat = theta_tilde;
    }

    for (long t = t2_end + 1; t <= horizon; ++t) {
        const Vector x = env.next_context(rng);
        const double p = priced_with_diag(theta_hat, x, bounds, diag);
        rec.record(env.realize(x, p, rng));
    }
    rec.trace().theta_stage1 = theta_tilde;
    rec.trace().theta_final = theta_hat;
    return rec.finish();
}

RegretTrace run_etc(const EtcPolicy& policy, Environment& env, long horizon, Rng& rng) {
    LetcPolicy as_letc;
    as_letc.plan.t1 = policy.t1;
    as_letc.plan.t2 = 0;
    as_letc.plan.eta = 0.0;
    as_letc.plan.horizon = horizon;
    return run_letc(as_letc, env, horizon, rng);
}

RegretTrace run_greedy(Environment& env, long horizon, Rng& rng) {
    const PriceBounds& bounds = env.bounds();
    RunRecorder rec(env, horizon);
    RunDiagnostics& diag = rec.trace().diag;
    const long burn_in = std::min<long>(2 * static_cast<long>(env.dim()), horizon);
    rec.trace().stage1_end = burn_in;
    rec.trace().stage2_end = burn_in;

    DesignStats stats(env.dim());
    std::optional<ModelParams> estimate;

    for (long t = 1; t <= burn_in; ++t) {
        const Interaction it = env.step(rng.coin() ? bounds.upper : bounds.lower, rng);
        stats = accumulate(stats, it);
        rec.record(it);
    }
    for (long t = burn_in + 1; t <= horizon; ++t) {
        fit_into(stats, estimate, diag);
        const Vector x = env.next_context(rng);
        const double p = priced_with_diag(estimate, x, bounds, diag);
        const Interaction it = env.realize(x, p, rng);
        stats = accumulate(stats, it);
        rec.record(it);
    }
    return rec.finish();
}

RegretTrace run_static(const StaticPolicy& policy, Environment& env, long horizon, Rng& rng) {
    const PriceBounds& bounds = env.bounds();
    RunRecorder rec(env, horizon);
    for (long t = 1; t <= horizon; ++t) {
        const Vector x = env.next_context(rng);
        const double raw = policy.price(x);
        const double p = clip(raw, bounds);
        if (p != raw) ++rec.trace().diag.clip_activations;
        rec.record(env.realize(x, p, rng));
    }
    return rec.finish();
}

RegretTrace run_oracle(Environment& env, long horizon, Rng& rng) {
    const PriceBounds& bounds = env.bounds();
    RunRecorder rec(env, horizon);
    for (long t = 1; t <= horizon; ++t) {
        const Vector x = env.next_context(rng);
        const PriceDecision dec = price_from_estimate(env.theta_true(), x, bounds);
        rec.record(env.realize(x, dec.price, rng));
    }
    return rec.finish();
}

}  // namespace

RegretTrace run(const PolicyKind& policy, Environment& env, long horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
    struct Visitor {
        Environment& env;
        long horizon;
        Rng& rng;
        RegretTrace operator()(const LetcPolicy& p) { return run_letc(p, env, horizon, rng); }
        RegretTrace operator()(const EtcPolicy& p) { return run_etc(p, env, horizon, rng); }
        RegretTrace operator()(const GreedyPolicy&) { return run_greedy(env, horizon, rng); }
        RegretTrace operator()(const StaticPolicy& p) { return run_static(p, env, horizon, rng); }
        RegretTrace operator()(const OraclePolicy&) { return run_oracle(env, horizon, rng); }
    };
    return std::visit(Visitor{env, horizon, rng}, policy);
}

RegretTrace doubling_run(PlannerMode mode, Environment& env, long total_t, long t0, Rng& rng,
                         double c1, double c2, double c3, double kappa, double eta_max,
                         const SpectrumSummary* summary) {
    if (t0 < 4) throw std::invalid_argument("doubling_run: t0 must be >= 4");
    if (total_t < 1) throw std::invalid_argument("doubling_run: total_t must be >= 1");

    RegretTrace out;
    double cum = 0.0;
    long spent = 0;
    long segment = t0;
    while (spent < total_t) {
        const long len = std::min(segment, total_t - spent);
        out.segment_starts.push_back(spent + 1);

        Plan plan;
        switch (mode) {
            case PlannerMode::Simple:
                plan = plan_simple(std::max<long>(len, 3), env.dim(), 1.0, eta_max);
                break;
            case PlannerMode::General:
                if (summary == nullptr)
                    throw std::invalid_argument("doubling_run: general mode needs a spectrum");
                plan = plan_general(std::max<long>(len, 3), env.dim(), *summary, kappa, eta_max);
                break;
            case PlannerMode::Experiment:
            case PlannerMode::TimeVaryingEta:
                plan = plan_experiment(std::max<long>(len, 3), env.dim(), c1, c2, c3);
                break;
        }
        LetcPolicy policy{plan, false, false};
        RegretTrace seg = run_letc(policy, env, len, rng);
        for (std::size_t i = 0; i < seg.per_step.size(); ++i) {
            cum += seg.per_step[i];
            out.per_step.push_back(seg.per_step[i]);
            out.cumulative.push_back(cum);
            out.prices.push_back(seg.prices[i]);
            out.price_gaps.push_back(seg.price_gaps[i]);
        }
        out.oracle_revenue += seg.oracle_revenue;
        out.diag.singular_fits += seg.diag.singular_fits;
        out.diag.fallback_prices += seg.diag.fallback_prices;
        out.diag.clip_activations += seg.diag.clip_activations;
        out.diag.clamped_poisson = seg.diag.clamped_poisson;
        spent += len;
        segment *= 2;
    }
    return out;
}

RegretTrace time_varying_eta_run(Environment& env, long horizon, Rng& rng, double eta_max) {
    const long d = static_cast<long>(env.dim());
    if (horizon < 8 * d) throw std::invalid_argument("time_varying_eta_run: horizon too short");
    const PriceBounds& bounds = env.bounds();
    RunRecorder rec(env, horizon);
    RunDiagnostics& diag = rec.trace().diag;
    const double log_t = std::log(static_cast<double>(horizon));

    DesignStats stats(env.dim());
    std::optional<ModelParams> estimate;
    const long burn_in = 4 * d;
    rec.trace().stage1_end = burn_in;
    rec.trace().stage2_end = burn_in;

    for (long t = 1; t <= burn_in; ++t) {
        const Interaction it = env.step(rng.coin() ? bounds.upper : bounds.lower, rng);
        stats = accumulate(stats, it);
        rec.record(it);
    }
    for (long t = burn_in + 1; t <= horizon; ++t) {
        fit_into(stats, estimate, diag);
        const Vector x = env.next_context(rng);
        const double eta_t =
            std::min(std::sqrt(static_cast<double>(d) / static_cast<double>(t)) * log_t, eta_max);
        const double base = raw_plugin_price(estimate, x, bounds, diag);
        const double proposed = base + eta_t * rng.rademacher();
        const double p = clip(proposed, bounds);
        if (p != proposed) ++diag.clip_activations;
        const Interaction it = env.realize(x, p, rng);
        stats = accumulate(stats, it);
        rec.record(it);
    }
    return rec.finish();
}

}  // namespace letc
