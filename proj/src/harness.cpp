#include "letc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "letc/errors.hpp"

namespace letc {

using nlohmann::json;

ModelParams InstanceSpec::theta(std::size_t dim) const {
    if (kind == "paper51") return paper_sim_theta(dim);
    if (kind == "discrete_example") return discrete_example_theta(dim);
    if (kind == "singular_constant_pstar") return singular_constant_pstar_theta();
    if (kind == "custom") {
        if (alpha.size() != dim || beta.size() != dim)
            throw std::invalid_argument("InstanceSpec: custom alpha/beta must match d");
        return ModelParams(alpha, beta);
    }
    throw std::invalid_argument("InstanceSpec: unknown kind '" + kind + "'");
}

Environment InstanceSpec::make_environment(std::size_t dim) const {
    if (kind == "singular_constant_pstar" && dim != 2)
        throw std::invalid_argument("InstanceSpec: singular_constant_pstar is a d=2 instance");
    std::shared_ptr<FeatureSampler> sampler;
    if (kind == "discrete_example")
        sampler = std::make_shared<DiscreteExampleSampler>(dim);
    else
        sampler = std::make_shared<ConstantPlusUniformSampler>(dim);
    NoiseModel noise = noise_kind == "poisson" ? NoiseModel::poisson() : NoiseModel::gaussian(sigma);
    return Environment(theta(dim), bounds(), noise, std::move(sampler));
}

ExperimentConfig ExperimentConfig::desk_default() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::full_grid(const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    cfg.d_grid = {4, 8, 16, 32, 64};
    cfg.t_grid.clear();
    for (int k = 7; k <= 17; ++k) cfg.t_grid.push_back(1L << k);
    cfg.trials = 100;
    return cfg;
}

namespace {

PlannerMode mode_from_name(const std::string& name) {
    if (name == "simple") return PlannerMode::Simple;
    if (name == "general") return PlannerMode::General;
    if (name == "experiment") return PlannerMode::Experiment;
    if (name == "timevarying") return PlannerMode::TimeVaryingEta;
    throw std::invalid_argument("unknown planner mode '" + name + "'");
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    if (j.contains("instance")) {
        const json& i = j["instance"];
        cfg.instance.kind = i.value("kind", cfg.instance.kind);
        cfg.instance.d = i.value("d", cfg.instance.d);
        if (i.contains("bounds")) {
            cfg.instance.lower = i["bounds"].at(0).get<double>();
            cfg.instance.upper = i["bounds"].at(1).get<double>();
        }
        if (i.contains("noise")) {
            cfg.instance.noise_kind = i["noise"].value("kind", cfg.instance.noise_kind);
            cfg.instance.sigma = i["noise"].value("sigma", cfg.instance.sigma);
        }
        if (i.contains("alpha")) cfg.instance.alpha = i["alpha"].get<Vector>();
        if (i.contains("beta")) cfg.instance.beta = i["beta"].get<Vector>();
    }
    if (j.contains("policies")) cfg.policies = j["policies"].get<std::vector<std::string>>();
    if (j.contains("planner")) {
        const json& p = j["planner"];
        cfg.planner.mode = mode_from_name(p.value("mode", std::string("experiment")));
        cfg.planner.c1 = p.value("c1", cfg.planner.c1);
        cfg.planner.c2 = p.value("c2", cfg.planner.c2);
        cfg.planner.c3 = p.value("c3", cfg.planner.c3);
        cfg.planner.c0 = p.value("c0", cfg.planner.c0);
        cfg.planner.kappa = p.value("kappa", cfg.planner.kappa);
        cfg.planner.eta_max = p.value("eta_max", cfg.planner.eta_max);
        cfg.planner.spectrum_samples = p.value("spectrum_samples", cfg.planner.spectrum_samples);
    }
    if (j.contains("d_grid")) cfg.d_grid = j["d_grid"].get<std::vector<std::size_t>>();
    if (j.contains("t_grid")) cfg.t_grid = j["t_grid"].get<std::vector<long>>();
    cfg.trials = j.value("trials", cfg.trials);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.slope_window = j.value("slope_window", cfg.slope_window);
    cfg.emit_traces = j.value("emit_traces", cfg.emit_traces);
    if (cfg.d_grid.empty() || cfg.t_grid.empty())
        throw std::invalid_argument("config: grids must be non-empty");
    if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["instance"] = {{"kind", cfg.instance.kind},
                     {"d", cfg.instance.d},
                     {"bounds", {cfg.instance.lower, cfg.instance.upper}},
                     {"noise", {{"kind", cfg.instance.noise_kind}, {"sigma", cfg.instance.sigma}}}};
    if (!cfg.instance.alpha.empty()) j["instance"]["alpha"] = cfg.instance.alpha;
    if (!cfg.instance.beta.empty()) j["instance"]["beta"] = cfg.instance.beta;
    j["policies"] = cfg.policies;
    j["planner"] = {{"mode", planner_mode_name(cfg.planner.mode)},
                    {"c1", cfg.planner.c1},
                    {"c2", cfg.planner.c2},
                    {"c3", cfg.planner.c3},
                    {"c0", cfg.planner.c0},
                    {"kappa", cfg.planner.kappa},
                    {"eta_max", cfg.planner.eta_max},
                    {"spectrum_samples", cfg.planner.spectrum_samples}};
    j["d_grid"] = cfg.d_grid;
    j["t_grid"] = cfg.t_grid;
    j["trials"] = cfg.trials;
    j["base_seed"] = cfg.base_seed;
    j["out_dir"] = cfg.out_dir;
    j["workers"] = cfg.workers;
    j["slope_window"] = cfg.slope_window;
    j["emit_traces"] = cfg.emit_traces;
    return j;
}

}  // namespace

std::string config_to_json_text(const ExperimentConfig& config) {
    return config_to_json(config).dump(2);
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t d, long horizon,
                         std::size_t policy_index, long trial_index) {
    std::uint64_t h = splitmix64(base ^ 0xA0761D6478BD642FULL);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(d) * 0x9E3779B97F4A7C15ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(horizon) * 0xBF58476D1CE4E5B9ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(policy_index) * 0x94D049BB133111EBULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(trial_index) * 0xD6E8FEB86659FD93ULL));
    return h;
}

namespace {

// Spectrum summaries for the general planner, one per d, estimated once with a
// seed derived from the base seed (policy/trial independent).
SpectrumSummary general_mode_summary(const ExperimentConfig& cfg, std::size_t d) {
    Rng rng(trial_seed(cfg.base_seed, d, 0, 9999, 0));
    ModelParams theta = cfg.instance.theta(d);
    std::shared_ptr<FeatureSampler> sampler;
    if (cfg.instance.kind == "discrete_example")
        sampler = std::make_shared<DiscreteExampleSampler>(d);
    else
        sampler = std::make_shared<ConstantPlusUniformSampler>(d);
    Matrix sigma = estimate_sigma_star(theta, *sampler, cfg.planner.spectrum_samples, rng);
    return make_spectrum_summary(sigma, theta, cfg.planner.spectrum_samples);
}

RegretTrace run_one(const ExperimentConfig& cfg, const std::string& policy, std::size_t d,
                    long horizon, Rng& rng, const SpectrumSummary* summary) {
    Environment env = cfg.instance.make_environment(d);
    const double eta_max = cfg.planner.resolved_eta_max(env.bounds());

    if (policy == "timevarying") return time_varying_eta_run(env, horizon, rng, eta_max);

    Plan plan;
    switch (cfg.planner.mode) {
        case PlannerMode::Simple:
            plan = plan_simple(horizon, d, cfg.planner.c0, eta_max);
            break;
        case PlannerMode::General:
            if (summary == nullptr) throw std::invalid_argument("run_one: missing spectrum");
            plan = plan_general(horizon, d, *summary, cfg.planner.kappa, eta_max);
            break;
        case PlannerMode::Experiment:
        case PlannerMode::TimeVaryingEta:
            plan = plan_experiment(horizon, d, cfg.planner.c1, cfg.planner.c2, cfg.planner.c3);
            break;
    }

    PolicyKind kind;
    if (policy == "letc")
        kind = LetcPolicy{plan, false, false};
    else if (policy == "etc")
        kind = EtcPolicy{plan.t1};
    else if (policy == "greedy")
        kind = GreedyPolicy{};
    else if (policy == "oracle")
        kind = OraclePolicy{};
    else
        throw std::invalid_argument("unknown policy '" + policy + "'");
    return run(kind, env, horizon, rng);
}

}  // namespace

RawResults run_grid(const ExperimentConfig& config) {
    RawResults raw;
    raw.config = config;

    const bool need_spectrum = config.planner.mode == PlannerMode::General;
    std::map<std::size_t, SpectrumSummary> summaries;
    if (need_spectrum)
        for (std::size_t d : config.d_grid) summaries.emplace(d, general_mode_summary(config, d));

    struct Task {
        std::size_t policy_index;
        std::size_t d;
        long horizon;
        long trial;
    };
    std::vector<Task> tasks;
    for (std::size_t pi = 0; pi < config.policies.size(); ++pi)
        for (std::size_t d : config.d_grid)
            for (long t : config.t_grid)
                for (long i = 0; i < config.trials; ++i) tasks.push_back({pi, d, t, i});

    raw.trials.resize(tasks.size());

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= tasks.size()) return;
            const Task& task = tasks[k];
            TrialResult& out = raw.trials[k];
            out.policy = config.policies[task.policy_index];
            out.d = task.d;
            out.horizon = task.horizon;
            out.trial = task.trial;
            try {
                Rng rng(trial_seed(config.base_seed, task.d, task.horizon, task.policy_index,
                                   task.trial));
                const SpectrumSummary* summary =
                    need_spectrum ? &summaries.at(task.d) : nullptr;
                RegretTrace trace =
                    run_one(config, out.policy, task.d, task.horizon, rng, summary);
                out.final_regret = trace.final_regret();
                if (config.emit_traces) out.cumulative = std::move(trace.cumulative);
            } catch (const std::exception& e) {
                out.failed = true;
                out.error = e.what();
            }
        }
    };

    int n_workers = config.workers > 0 ? config.workers
                                       : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    n_workers = std::min<int>(n_workers, static_cast<int>(tasks.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return raw;
}

AggregateResult aggregate(const RawResults& raw) {
    AggregateResult agg;
    const ExperimentConfig& cfg = raw.config;
    std::size_t idx = 0;
    for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
        for (std::size_t d : cfg.d_grid) {
            std::vector<CellAggregate> row;
            for (long t : cfg.t_grid) {
                CellAggregate cell;
                cell.policy = cfg.policies[pi];
                cell.d = d;
                cell.horizon = t;
                double sum = 0.0;
                std::vector<double> values;
                for (long i = 0; i < cfg.trials; ++i, ++idx) {
                    const TrialResult& tr = raw.trials[idx];
                    if (tr.failed) continue;
                    values.push_back(tr.final_regret);
                    sum += tr.final_regret;
                }
                cell.count = static_cast<long>(values.size());
                cell.mean = cell.count > 0 ? sum / cell.count : 0.0;
                if (cell.count > 1) {
                    double ss = 0.0;
                    for (double v : values) ss += (v - cell.mean) * (v - cell.mean);
                    cell.stddev = std::sqrt(ss / (cell.count - 1));
                } else {
                    cell.stddev = 0.0;
                    cell.single_trial = cell.count == 1;
                }
                row.push_back(cell);
            }
            // per (policy, d) slope over the window of T values
            std::vector<SlopePoint> points;
            for (const CellAggregate& c : row)
                if (c.count > 0 && c.mean > 0.0)
                    points.push_back({static_cast<double>(c.horizon), c.mean});
            double slope = std::numeric_limits<double>::quiet_NaN();
            if (points.size() >= 2) slope = loglog_slope(points, cfg.slope_window);
            for (CellAggregate& c : row) {
                c.slope = slope;
                agg.cells.push_back(c);
            }
        }
    }
    return agg;
}

double loglog_slope(const std::vector<SlopePoint>& points, int window) {
    if (points.size() < 2) throw std::invalid_argument("loglog_slope: need at least 2 points");
    std::vector<SlopePoint> pts = points;
    std::sort(pts.begin(), pts.end(),
              [](const SlopePoint& a, const SlopePoint& b) { return a.horizon < b.horizon; });
    if (window > 0 && static_cast<std::size_t>(window) < pts.size())
        pts.erase(pts.begin(), pts.end() - window);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const SlopePoint& p : pts) {
        if (!(p.horizon > 0.0) || !(p.value > 0.0))
            throw std::invalid_argument("loglog_slope: nonpositive point");
        const double lx = std::log(p.horizon), ly = std::log(p.value);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("loglog_slope: degenerate horizons");
    return (n * sxy - sx * sy) / denom;
}

namespace {

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

}  // namespace

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string text = config_to_json(config).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::vector<std::string> emit(const RawResults& raw, const AggregateResult& agg) {
    namespace fs = std::filesystem;
    const ExperimentConfig& cfg = raw.config;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw std::runtime_error("emit: cannot create " + cfg.out_dir + ": " + ec.message());

    std::vector<std::string> written;

    const std::string agg_path = (fs::path(cfg.out_dir) / "aggregates.csv").string();
    {
        std::ofstream out(agg_path);
        if (!out) throw std::runtime_error("emit: cannot open " + agg_path);
        out << "policy,d,T,mean,std,slope\n";
        for (const CellAggregate& c : agg.cells)
            out << c.policy << ',' << c.d << ',' << c.horizon << ',' << format_double(c.mean)
                << ',' << format_double(c.stddev) << ',' << format_double(c.slope) << "\n";
        written.push_back(agg_path);
    }

    if (cfg.emit_traces) {
        const std::string tr_path = (fs::path(cfg.out_dir) / "traces.csv").string();
        std::ofstream out(tr_path);
        if (!out) throw std::runtime_error("emit: cannot open " + tr_path);
        out << "policy,d,T,trial,t,cum_regret\n";
        for (const TrialResult& tr : raw.trials) {
            if (tr.failed) continue;
            for (std::size_t t = 0; t < tr.cumulative.size(); ++t)
                out << tr.policy << ',' << tr.d << ',' << tr.horizon << ',' << tr.trial << ','
                    << (t + 1) << ',' << format_double(tr.cumulative[t]) << "\n";
        }
        written.push_back(tr_path);
    }

    const std::string json_path = (fs::path(cfg.out_dir) / "results.json").string();
    {
        json j;
        j["config"] = config_to_json(cfg);
        j["config_hash"] = config_hash(cfg);
        json cells = json::array();
        for (const CellAggregate& c : agg.cells) {
            cells.push_back({{"policy", c.policy},
                             {"d", c.d},
                             {"T", c.horizon},
                             {"mean", c.mean},
                             {"std", c.stddev},
                             {"count", c.count},
                             {"single_trial", c.single_trial},
                             {"slope", c.slope}});
        }
        j["aggregates"] = cells;
        json failures = json::array();
        for (const TrialResult& tr : raw.trials)
            if (tr.failed)
                failures.push_back({{"policy", tr.policy},
                                    {"d", tr.d},
                                    {"T", tr.horizon},
                                    {"trial", tr.trial},
                                    {"error", tr.error}});
        j["failures"] = failures;
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("emit: cannot open " + json_path);
        out << j.dump(2) << "\n";
        written.push_back(json_path);
    }
    return written;
}

}  // namespace letc
