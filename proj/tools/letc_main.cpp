#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "letc/calibrate.hpp"
#include "letc/errors.hpp"
#include "letc/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace letc;

namespace {

json plan_to_json(const Plan& plan) {
    return {{"mode", planner_mode_name(plan.mode)},
            {"T", plan.horizon},
            {"T1", plan.t1},
            {"T2", plan.t2},
            {"eta", plan.eta},
            {"d_tilde", plan.d_tilde},
            {"horizon_too_short", plan.horizon_too_short},
            {"eta_capped", plan.eta_capped},
            {"planner_fallback", plan.planner_fallback}};
}

PlannerMode parse_mode(const std::string& name) {
    if (name == "simple") return PlannerMode::Simple;
    if (name == "general") return PlannerMode::General;
    if (name == "experiment") return PlannerMode::Experiment;
    if (name == "timevarying") return PlannerMode::TimeVaryingEta;
    throw CLI::ValidationError("--mode", "unknown mode '" + name + "'");
}

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig::desk_default();
    return config_from_json_file(path);
}

SpectrumSummary summary_for(const ExperimentConfig& cfg, std::size_t d, long samples,
                            std::uint64_t seed) {
    Rng rng(seed);
    ModelParams theta = cfg.instance.theta(d);
    std::shared_ptr<FeatureSampler> sampler;
    if (cfg.instance.kind == "discrete_example")
        sampler = std::make_shared<DiscreteExampleSampler>(d);
    else
        sampler = std::make_shared<ConstantPlusUniformSampler>(d);
    Matrix sigma = estimate_sigma_star(theta, *sampler, samples, rng);
    return make_spectrum_summary(sigma, theta, samples);
}

int cmd_plan(const std::string& config_path, long horizon, std::size_t d,
             const std::string& mode_name, std::uint64_t seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (!mode_name.empty()) cfg.planner.mode = parse_mode(mode_name);
    const double eta_max = cfg.planner.resolved_eta_max(cfg.instance.bounds());

    Plan plan;
    switch (cfg.planner.mode) {
        case PlannerMode::Simple:
            plan = plan_simple(horizon, d, cfg.planner.c0, eta_max);
            break;
        case PlannerMode::General: {
            SpectrumSummary summary = summary_for(cfg, d, cfg.planner.spectrum_samples, seed);
            plan = plan_general(horizon, d, summary, cfg.planner.kappa, eta_max);
            break;
        }
        case PlannerMode::Experiment:
        case PlannerMode::TimeVaryingEta:
            plan = plan_experiment(horizon, d, cfg.planner.c1, cfg.planner.c2, cfg.planner.c3);
            break;
    }
    std::cout << plan_to_json(plan).dump(2) << "\n";
    return 0;
}

int cmd_spectrum(const std::string& config_path, std::size_t d, long samples, long horizon,
                 std::uint64_t seed) {
    ExperimentConfig cfg = load_config(config_path);
    const double eta_max = cfg.planner.resolved_eta_max(cfg.instance.bounds());
    ModelParams theta = cfg.instance.theta(d);
    SpectrumSummary summary = summary_for(cfg, d, samples, seed);

    // the raw matrix again for the null-space residual
    Rng rng(seed);
    std::shared_ptr<FeatureSampler> sampler;
    if (cfg.instance.kind == "discrete_example")
        sampler = std::make_shared<DiscreteExampleSampler>(d);
    else
        sampler = std::make_shared<ConstantPlusUniformSampler>(d);
    Matrix sigma = estimate_sigma_star(theta, *sampler, samples, rng);
    NullSpaceCheck null_check = verify_null_space(sigma, theta);

    json table = json::array();
    const double lam1 = summary.eigenvalues.empty() ? 1.0 : std::max(summary.eigenvalues[0], 1e-12);
    const double eta_hi = std::sqrt(lam1) + 1.0;
    for (int i = 0; i <= 24; ++i) {
        const double eta = eta_hi * static_cast<double>(i) / 24.0;
        table.push_back({{"eta", eta},
                         {"d_tilde", degenerate_dimension(summary, eta)},
                         {"S", singularity(summary, eta)}});
    }

    json j;
    j["instance"] = cfg.instance.kind;
    j["d"] = d;
    j["samples"] = samples;
    j["eigenvalues"] = summary.eigenvalues;
    j["null_residual"] = null_check.residual;
    j["second_smallest_eigenvalue"] = null_check.second_smallest;
    j["table"] = table;
    try {
        CriticalSolution sol =
            solve_critical_eta(summary, static_cast<double>(horizon), d, cfg.planner.kappa, eta_max);
        j["critical"] = {{"T", horizon},
                         {"kappa", cfg.planner.kappa},
                         {"eta_star", sol.eta_star},
                         {"residual", sol.residual},
                         {"lhs", sol.lhs_value},
                         {"rhs", sol.rhs_value},
                         {"capped", sol.capped},
                         {"d_tilde", sol.d_tilde},
                         {"regular_zeta2", check_regular(summary, sol, static_cast<double>(horizon),
                                                         d, cfg.planner.kappa, 2.0)}};
    } catch (const NoBracket& e) {
        j["critical"] = {{"T", horizon}, {"error", e.what()}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir, int workers, const std::string& mode_name,
                 bool full_grid) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_set) cfg.base_seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (workers >= 0) cfg.workers = workers;
    if (!mode_name.empty()) cfg.planner.mode = parse_mode(mode_name);
    if (full_grid) cfg = ExperimentConfig::full_grid(cfg);

    RawResults raw = run_grid(cfg);
    AggregateResult agg = aggregate(raw);
    for (const std::string& path : emit(raw, agg)) std::cout << "wrote " << path << "\n";
    long failed = 0;
    for (const TrialResult& t : raw.trials) failed += t.failed ? 1 : 0;
    if (failed > 0) std::cerr << failed << " trial(s) failed; see results.json\n";
    return 0;
}

int cmd_doubling(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir, const std::string& mode_name, long t0, long total_t,
                 long trials) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_set) cfg.base_seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!mode_name.empty()) cfg.planner.mode = parse_mode(mode_name);
    if (trials > 0) cfg.trials = trials;

    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "doubling_traces.csv").string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("doubling: cannot open " + path);
    out << "policy,d,T,trial,t,cum_regret\n";
    out.precision(12);

    json segments = json::object();
    for (std::size_t di = 0; di < cfg.d_grid.size(); ++di) {
        const std::size_t d = cfg.d_grid[di];
        for (long trial = 0; trial < cfg.trials; ++trial) {
            Rng rng(trial_seed(cfg.base_seed, d, total_t, 500 + di, trial));
            Environment env = cfg.instance.make_environment(d);
            RegretTrace trace = doubling_run(
                cfg.planner.mode, env, total_t, t0, rng, cfg.planner.c1, cfg.planner.c2,
                cfg.planner.c3, cfg.planner.kappa, cfg.planner.resolved_eta_max(env.bounds()));
            for (std::size_t t = 0; t < trace.cumulative.size(); ++t)
                out << "letc_doubling," << d << ',' << total_t << ',' << trial << ',' << (t + 1)
                    << ',' << trace.cumulative[t] << "\n";
            if (trial == 0) segments[std::to_string(d)] = trace.segment_starts;
        }
    }
    out.close();
    std::cout << "wrote " << path << "\n";

    const std::string meta = (fs::path(cfg.out_dir) / "doubling_meta.json").string();
    std::ofstream mo(meta);
    mo << json({{"t0", t0},
                {"total_t", total_t},
                {"trials", cfg.trials},
                {"segment_starts", segments},
                {"config_hash", config_hash(cfg)}})
              .dump(2)
       << "\n";
    std::cout << "wrote " << meta << "\n";
    return 0;
}

int cmd_synth(const std::string& out_path, int products, long records, std::uint64_t seed) {
    std::vector<SalesRecord> all;
    Rng rng(seed);
    for (int p = 0; p < products; ++p) {
        SyntheticProductConfig cfg;
        cfg.product_id = "SKU-" + std::to_string(p);
        cfg.n_records = records;
        SyntheticProduct product = generate_synthetic_product(cfg, rng);
        all.insert(all.end(), product.records.begin(), product.records.end());
    }
    write_sales_csv(out_path, all);
    std::cout << "wrote " << out_path << " (" << all.size() << " records)\n";
    return 0;
}

std::map<std::string, std::vector<SalesRecord>> group_by_product(
    const std::vector<SalesRecord>& records) {
    std::map<std::string, std::vector<SalesRecord>> groups;
    for (const SalesRecord& r : records) groups[r.product_id].push_back(r);
    return groups;
}

json calibrate_product(const std::string& product_id, const std::vector<SalesRecord>& records,
                       std::uint64_t seed) {
    json j;
    j["product_id"] = product_id;
    j["records"] = records.size();
    const PriceBounds bounds(records.front().min_allowed, records.front().max_allowed);
    j["bounds"] = {bounds.lower, bounds.upper};
    try {
        ModelParams theta = fit_linear_demand(records);
        j["theta"] = {{"alpha", theta.alpha}, {"beta", theta.beta}};
        FeatureModel fm = fit_feature_model(records);
        json weekdays = json::array();
        for (int w = 0; w < 7; ++w) {
            const WeekdayGaussian& g = fm.weekdays[w];
            weekdays.push_back({{"mean", {g.mean[0], g.mean[1]}},
                                {"cov", {{g.cov[0][0], g.cov[0][1]}, {g.cov[1][0], g.cov[1][1]}}},
                                {"count", g.count}});
        }
        j["feature_model"] = weekdays;
        Rng probe(seed);
        try {
            build_environment(theta, fm, bounds, probe);
            j["discarded"] = false;
        } catch (const Discarded& e) {
            j["discarded"] = true;
            j["discard_reason"] = e.what();
        }
    } catch (const std::exception& e) {
        j["error"] = e.what();
    }
    return j;
}

int cmd_calibrate(const std::string& data_path, const std::string& out_path, std::uint64_t seed) {
    auto groups = group_by_product(read_sales_csv(data_path));
    json report = json::array();
    for (const auto& [pid, recs] : groups) report.push_back(calibrate_product(pid, recs, seed));
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("calibrate: cannot open " + out_path);
    out << report.dump(2) << "\n";
    std::cout << "wrote " << out_path << " (" << report.size() << " products)\n";
    return 0;
}

int cmd_evaluate(const std::string& data_path, const std::string& out_path, long horizon,
                 long trials, std::uint64_t seed, double c1, double c2, double c3,
                 long krr_max_support) {
    auto groups = group_by_product(read_sales_csv(data_path));
    json report = json::array();
    for (const auto& [pid, recs] : groups) {
        json j = calibrate_product(pid, recs, seed);
        if (j.contains("error") || j.value("discarded", true)) {
            report.push_back(j);
            continue;
        }
        const PriceBounds bounds(recs.front().min_allowed, recs.front().max_allowed);
        ModelParams theta = fit_linear_demand(recs);
        FeatureModel fm = fit_feature_model(recs);

        // offline policy: historical price as a function of features
        std::vector<Vector> feats;
        Vector prices;
        const std::size_t start =
            recs.size() > static_cast<std::size_t>(krr_max_support)
                ? recs.size() - static_cast<std::size_t>(krr_max_support)
                : 0;
        for (std::size_t i = start; i < recs.size(); ++i) {
            feats.push_back(encode_features(recs[i]));
            prices.push_back(recs[i].price);
        }
        KrrModel krr = krr_fit(feats, prices, 0.05, 0.2);
        StaticPolicy offline = offline_krr_policy(krr, bounds);

        double letc_rev = 0.0, offline_rev = 0.0, oracle_rev = 0.0;
        for (long trial = 0; trial < trials; ++trial) {
            const std::uint64_t s = splitmix64(seed ^ splitmix64(trial + 1));
            {
                Rng rng(s);
                Environment env = build_environment(theta, fm, bounds, rng);
                Plan plan = plan_experiment(horizon, kCalibrateDim, c1, c2, c3);
                RevenueEvaluation ev =
                    evaluate_policy_revenue(LetcPolicy{plan, false, false}, env, horizon, rng);
                letc_rev += ev.expected_revenue;
                oracle_rev += ev.oracle_revenue;
            }
            {
                Rng rng(s);
                Environment env = build_environment(theta, fm, bounds, rng);
                RevenueEvaluation ev = evaluate_policy_revenue(offline, env, horizon, rng);
                offline_rev += ev.expected_revenue;
            }
        }
        letc_rev /= trials;
        offline_rev /= trials;
        oracle_rev /= trials;
        j["revenue"] = {{"horizon", horizon},
                        {"trials", trials},
                        {"letc", letc_rev},
                        {"offline_krr", offline_rev},
                        {"oracle", oracle_rev},
                        {"improvement_percent", improvement_percent(letc_rev, offline_rev)}};
        report.push_back(j);
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("evaluate: cannot open " + out_path);
    out << report.dump(2) << "\n";
    std::cout << "wrote " << out_path << " (" << report.size() << " products)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contextual dynamic pricing simulation lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_path, mode_name, data_path;
    std::uint64_t seed = 20240501;
    bool seed_set = false;
    long horizon = 16384, t0 = 128, total_t = 32768, samples = 100000, trials_opt = 0;
    std::size_t d = 4;
    int workers = -1, products = 10;
    long records = 10000, eval_trials = 20, krr_max_support = 730;
    double c1 = 3.0, c2 = 0.1, c3 = 0.5;
    bool full_grid = false;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "base seed")->each([&](const std::string&) { seed_set = true; });
    };

    auto* plan_cmd = app.add_subcommand("plan", "print stage lengths and eta for (T, d, mode)");
    plan_cmd->add_option("--config", config_path, "config JSON");
    plan_cmd->add_option("--t", horizon, "horizon T")->required();
    plan_cmd->add_option("--d", d, "context dimension")->required();
    plan_cmd->add_option("--mode", mode_name, "simple|general|experiment|timevarying");
    add_seed(plan_cmd);

    auto* spec_cmd = app.add_subcommand("spectrum", "eigenvalues, d-tilde/S table, critical eta");
    spec_cmd->add_option("--config", config_path, "config JSON");
    spec_cmd->add_option("--d", d, "context dimension");
    spec_cmd->add_option("--samples", samples, "Monte Carlo samples");
    spec_cmd->add_option("--t", horizon, "horizon for the critical inequality");
    add_seed(spec_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "replicated grid runs");
    sim_cmd->add_option("--config", config_path, "config JSON");
    sim_cmd->add_option("--out", out_dir, "output directory");
    sim_cmd->add_option("--workers", workers, "worker threads (0 = all cores)");
    sim_cmd->add_option("--mode", mode_name, "planner mode override");
    sim_cmd->add_flag("--full-grid", full_grid, "paper-scale grid (d<=64, T<=2^17, m=100)");
    add_seed(sim_cmd);

    auto* dbl_cmd = app.add_subcommand("doubling", "anytime curves via the doubling trick");
    dbl_cmd->add_option("--config", config_path, "config JSON");
    dbl_cmd->add_option("--out", out_dir, "output directory");
    dbl_cmd->add_option("--mode", mode_name, "planner mode override");
    dbl_cmd->add_option("--t0", t0, "first segment length");
    dbl_cmd->add_option("--total-t", total_t, "total steps");
    dbl_cmd->add_option("--trials", trials_opt, "trials per d");
    add_seed(dbl_cmd);

    auto* synth_cmd = app.add_subcommand("synth", "generate schema-compatible synthetic sales data");
    synth_cmd->add_option("--out", out_path, "output CSV path")->required();
    synth_cmd->add_option("--products", products, "number of products");
    synth_cmd->add_option("--records", records, "records per product");
    add_seed(synth_cmd);

    auto* cal_cmd = app.add_subcommand("calibrate", "fit demand + feature models per product");
    cal_cmd->add_option("--data", data_path, "historical sales CSV")->required();
    cal_cmd->add_option("--out", out_path, "report JSON path")->required();
    add_seed(cal_cmd);

    auto* eval_cmd = app.add_subcommand("evaluate", "revenue comparison on the rebuilt environment");
    eval_cmd->add_option("--data", data_path, "historical sales CSV")->required();
    eval_cmd->add_option("--out", out_path, "report JSON path")->required();
    eval_cmd->add_option("--horizon", horizon, "testing days")->default_val(365);
    eval_cmd->add_option("--trials", eval_trials, "trials per product");
    eval_cmd->add_option("--c1", c1, "LetC planner C1");
    eval_cmd->add_option("--c2", c2, "LetC planner C2");
    eval_cmd->add_option("--c3", c3, "LetC planner C3");
    eval_cmd->add_option("--krr-max-support", krr_max_support, "KRR training-point cap");
    add_seed(eval_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) return cmd_plan(config_path, horizon, d, mode_name, seed);
        if (spec_cmd->parsed()) return cmd_spectrum(config_path, d, samples, horizon, seed);
        if (sim_cmd->parsed())
            return cmd_simulate(config_path, seed, seed_set, out_dir, workers, mode_name, full_grid);
        if (dbl_cmd->parsed())
            return cmd_doubling(config_path, seed, seed_set, out_dir, mode_name, t0, total_t,
                                trials_opt);
        if (synth_cmd->parsed()) return cmd_synth(out_path, products, records, seed);
        if (cal_cmd->parsed()) return cmd_calibrate(data_path, out_path, seed);
        if (eval_cmd->parsed())
            return cmd_evaluate(data_path, out_path, horizon, eval_trials, seed, c1, c2, c3,
                                krr_max_support);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json({{"error", e.what()}}).dump() << "\n";
        return 2;
    }
    return 1;
}
