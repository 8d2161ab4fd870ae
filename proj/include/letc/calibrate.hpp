#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "letc/demand.hpp"
#include "letc/policy.hpp"

namespace letc {

struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    // 0 = Monday ... 6 = Sunday
    int weekday() const;
    Date next_day() const;
    std::string iso() const;
    static Date parse_iso(const std::string& text);
};

struct SalesRecord {
    std::string product_id;
    Date date;
    double price = 0.0;
    double units_sold = 0.0;
    double comp_min = 0.0;
    double comp_max = 0.0;
    double min_allowed = 0.0;
    double max_allowed = 0.0;
};

inline constexpr const char* kSalesCsvHeader =
    "product_id,date,price,units_sold,comp_min,comp_max,min_allowed,max_allowed";

std::vector<SalesRecord> read_sales_csv(const std::string& path);
void write_sales_csv(const std::string& path, const std::vector<SalesRecord>& records);

// 9 features: weekday one-hot (Mon..Sun) + comp_min + comp_max
constexpr std::size_t kCalibrateDim = 9;
Vector encode_features(const SalesRecord& record);

// OLS on (encode_features, price, units_sold); propagates SingularSystem.
ModelParams fit_linear_demand(const std::vector<SalesRecord>& records);

// One bivariate Gaussian per weekday over (comp_min, comp_max).
struct WeekdayGaussian {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<std::array<double, 2>, 2> cov{{{0.0, 0.0}, {0.0, 0.0}}};
    long count = 0;
};

struct FeatureModel {
    std::array<WeekdayGaussian, 7> weekdays;
};

// Sample means and (n-1)-covariances per weekday, covariance clamped PSD.
// Errors when any weekday holds fewer than 3 records.
FeatureModel fit_feature_model(const std::vector<SalesRecord>& records);

// Draw from the weekday's Gaussian; accept iff comp_min < comp_max and the mean
// demand is positive at both price endpoints. nullopt = Discard after max_tries.
std::optional<Vector> rejection_sample(const FeatureModel& model, const ModelParams& theta_true,
                                       const PriceBounds& bounds, int weekday, Rng& rng,
                                       long max_tries = 10000);

// ---------------------------------------------------------------------------
// offline kernel-ridge policy

struct KrrModel {
    std::vector<Vector> support;
    Vector coefficients;
    double gamma = 0.05;
    double alpha = 0.2;
};

// Dual solve (K + alpha I) c = y with K_ij = exp(-gamma ||x_i - x_j||^2).
KrrModel krr_fit(const std::vector<Vector>& features, const Vector& targets, double gamma,
                 double alpha);
double krr_predict(const KrrModel& model, const Vector& x);

// StaticPolicy pricing at clip(krr_predict(x)).
StaticPolicy offline_krr_policy(KrrModel model, PriceBounds bounds);

// ---------------------------------------------------------------------------
// semi-synthetic environment

// Cycles weekdays Mon..Sun and draws accepted competitor pairs; throws
// Discarded when a weekday exhausts its tries.
class WeekdayCompetitorSampler final : public FeatureSampler {
public:
    WeekdayCompetitorSampler(FeatureModel model, ModelParams theta_true, PriceBounds bounds,
                             long max_tries = 10000);
    std::size_t dim() const override { return kCalibrateDim; }
    Vector sample(Rng& rng) override;
    std::string name() const override { return "weekday_competitor"; }

private:
    FeatureModel model_;
    ModelParams theta_;
    PriceBounds bounds_;
    long max_tries_;
    int next_weekday_ = 0;
};

// Poisson-demand environment over the fitted feature model. Validates that
// every weekday can produce an accepted feature (probing with the given rng);
// a Discarded probe propagates so the product surfaces as discarded.
Environment build_environment(const ModelParams& theta_true, const FeatureModel& feature_model,
                              const PriceBounds& bounds, Rng& probe_rng);

struct RevenueEvaluation {
    double expected_revenue = 0.0;  // sum_t p_t f*(x_t, p_t)
    double oracle_revenue = 0.0;    // best feasible price each step
    RegretTrace trace;
};

RevenueEvaluation evaluate_policy_revenue(const PolicyKind& policy, Environment& env,
                                          long horizon, Rng& rng);

// (revenue - baseline) / baseline * 100
double improvement_percent(double revenue, double baseline_revenue);

// argmax over [lower,upper] of p (x'alpha + p x'beta); handles either slope sign
double best_feasible_price(const ModelParams& theta, const Vector& x, const PriceBounds& bounds);

// ---------------------------------------------------------------------------
// synthetic historical data (the original retail dataset is proprietary)

struct SyntheticProductConfig {
    std::string product_id = "SKU-0";
    long n_records = 10000;
    PriceBounds bounds{1.0, 10.0};
    Date start_date{2022, 1, 1};
};

struct SyntheticProduct {
    SyntheticProductConfig config;
    ModelParams theta_true;        // d = 9 ground truth
    FeatureModel feature_model;
    std::vector<SalesRecord> records;
};

// Draws a plausible ground truth (positive demand on the full price interval,
// interior optimal price) and Poisson sales at uniform historical prices.
SyntheticProduct generate_synthetic_product(const SyntheticProductConfig& config, Rng& rng);

}  // namespace letc
