#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "letc/calibrate.hpp"
#include "letc/policy.hpp"

namespace letc {

struct InstanceSpec {
    std::string kind = "paper51";  // paper51 | discrete_example | singular_constant_pstar | custom
    std::size_t d = 4;
    double lower = 0.0;
    double upper = 2.0;
    std::string noise_kind = "gaussian";  // gaussian | poisson
    double sigma = 0.01;
    Vector alpha;  // custom kind only
    Vector beta;

    ModelParams theta(std::size_t dim) const;
    Environment make_environment(std::size_t dim) const;
    PriceBounds bounds() const { return PriceBounds(lower, upper); }
};

struct PlannerSpec {
    PlannerMode mode = PlannerMode::Experiment;
    double c1 = 10.0, c2 = 0.005, c3 = 0.5;  // experiment constants
    double c0 = 1.0;                          // simple-mode eta constant
    double kappa = 1.0;
    double eta_max = 0.0;       // 0 = default (upper-lower)/4
    long spectrum_samples = 100000;  // general mode Sigma* estimation

    double resolved_eta_max(const PriceBounds& bounds) const {
        return eta_max > 0.0 ? eta_max : bounds.width() / 4.0;
    }
};

struct ExperimentConfig {
    InstanceSpec instance;
    std::vector<std::string> policies{"letc"};  // letc | etc | greedy | oracle | timevarying
    PlannerSpec planner;
    std::vector<std::size_t> d_grid{4, 8, 16};
    std::vector<long> t_grid{1024, 2048, 4096, 8192, 16384, 32768};
    long trials = 20;
    std::uint64_t base_seed = 20240501;
    std::string out_dir = "out";
    int workers = 0;  // 0 = hardware concurrency
    int slope_window = 4;
    bool emit_traces = true;

    static ExperimentConfig desk_default();
    static ExperimentConfig full_grid(const ExperimentConfig& base);
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& config);

// splitmix64 avalanche over the concatenated fields; frozen so every grid cell
// and trial reproduces independently of execution order.
std::uint64_t trial_seed(std::uint64_t base, std::size_t d, long horizon,
                         std::size_t policy_index, long trial_index);

struct TrialResult {
    std::string policy;
    std::size_t d = 0;
    long horizon = 0;
    long trial = 0;
    double final_regret = 0.0;
    std::vector<double> cumulative;  // kept only when the config asks for traces
    bool failed = false;
    std::string error;
};

struct RawResults {
    ExperimentConfig config;
    std::vector<TrialResult> trials;  // grid order: policy, d, T, trial
};

RawResults run_grid(const ExperimentConfig& config);

struct CellAggregate {
    std::string policy;
    std::size_t d = 0;
    long horizon = 0;
    double mean = 0.0;
    double stddev = 0.0;  // n-1 convention; 0 and flagged for a single trial
    long count = 0;
    bool single_trial = false;
    double slope = 0.0;  // per (policy, d) over the slope window, repeated per row
};

struct AggregateResult {
    std::vector<CellAggregate> cells;  // grid order
};

AggregateResult aggregate(const RawResults& raw);

struct SlopePoint {
    double horizon = 0.0;
    double value = 0.0;
};

// Least-squares slope of log(value) on log(horizon) over the last `window`
// points (all points when window <= 0). Errors on nonpositive values.
double loglog_slope(const std::vector<SlopePoint>& points, int window);

// Writes aggregates.csv, traces.csv (when kept), and results.json into out_dir.
// Returns the emitted file paths.
std::vector<std::string> emit(const RawResults& raw, const AggregateResult& agg);

std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace letc
