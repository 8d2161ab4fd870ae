#include "letc/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "letc/errors.hpp"
#include "letc/estimator.hpp"

namespace letc {

namespace {

// Howard Hinnant's days-from-civil; avoids locale-dependent date machinery.
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

int Date::weekday() const {
    const long z = days_from_civil(year, month, day);
    // 1970-01-01 was a Thursday; shift so Monday = 0
    return static_cast<int>(((z % 7) + 7 + 3) % 7);
}

Date Date::next_day() const {
    Date out;
    civil_from_days(days_from_civil(year, month, day) + 1, out.year, out.month, out.day);
    return out;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse_iso(const std::string& text) {
    Date d;
    if (std::sscanf(text.c_str(), "%d-%d-%d", &d.year, &d.month, &d.day) != 3 ||
        d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw std::invalid_argument("Date: invalid ISO-8601 date '" + text + "'");
    return d;
}

std::vector<SalesRecord> read_sales_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_sales_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_sales_csv: empty file " + path);
    if (line != kSalesCsvHeader)
        throw std::runtime_error("read_sales_csv: unexpected header in " + path);

    std::vector<SalesRecord> records;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8)
            throw std::runtime_error("read_sales_csv: bad field count at line " +
                                     std::to_string(lineno));
        SalesRecord r;
        r.product_id = fields[0];
        r.date = Date::parse_iso(fields[1]);
        r.price = std::stod(fields[2]);
        r.units_sold = std::stod(fields[3]);
        r.comp_min = std::stod(fields[4]);
        r.comp_max = std::stod(fields[5]);
        r.min_allowed = std::stod(fields[6]);
        r.max_allowed = std::stod(fields[7]);
        records.push_back(std::move(r));
    }
    return records;
}

void write_sales_csv(const std::string& path, const std::vector<SalesRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sales_csv: cannot open " + path);
    out << kSalesCsvHeader << "\n";
    out.precision(12);
    for (const SalesRecord& r : records) {
        out << r.product_id << ',' << r.date.iso() << ',' << r.price << ',' << r.units_sold << ','
            << r.comp_min << ',' << r.comp_max << ',' << r.min_allowed << ',' << r.max_allowed
            << "\n";
    }
}

Vector encode_features(const SalesRecord& record) {
    Vector x(kCalibrateDim, 0.0);
    x[record.date.weekday()] = 1.0;
    x[7] = record.comp_min;
    x[8] = record.comp_max;
    return x;
}

ModelParams fit_linear_demand(const std::vector<SalesRecord>& records) {
    if (records.size() < 2 * kCalibrateDim)
        throw std::invalid_argument("fit_linear_demand: need at least 18 records");
    DesignStats stats(kCalibrateDim);
    for (const SalesRecord& r : records)
        stats = accumulate(stats, Interaction{encode_features(r), r.price, r.units_sold, 0});
    return ols_fit(stats).params;
}

FeatureModel fit_feature_model(const std::vector<SalesRecord>& records) {
    std::array<std::vector<std::array<double, 2>>, 7> buckets;
    for (const SalesRecord& r : records)
        buckets[r.date.weekday()].push_back({r.comp_min, r.comp_max});

    FeatureModel model;
    for (int w = 0; w < 7; ++w) {
        const auto& pts = buckets[w];
        if (pts.size() < 3)
            throw std::invalid_argument("fit_feature_model: weekday " + std::to_string(w) +
                                        " has fewer than 3 records");
        WeekdayGaussian g;
        g.count = static_cast<long>(pts.size());
        for (const auto& p : pts) {
            g.mean[0] += p[0];
            g.mean[1] += p[1];
        }
        g.mean[0] /= g.count;
        g.mean[1] /= g.count;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (const auto& p : pts) {
            const double dx = p[0] - g.mean[0], dy = p[1] - g.mean[1];
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        const double denom = static_cast<double>(g.count - 1);
        g.cov[0][0] = sxx / denom;
        g.cov[0][1] = g.cov[1][0] = sxy / denom;
        g.cov[1][1] = syy / denom;

        // clamp to PSD: 2x2 closed-form eigenvalues
        const double tr = g.cov[0][0] + g.cov[1][1];
        const double det = g.cov[0][0] * g.cov[1][1] - g.cov[0][1] * g.cov[0][1];
        const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
        const double lam_min = tr / 2.0 - disc;
        if (lam_min < 0.0) {
            g.cov[0][0] -= lam_min;
            g.cov[1][1] -= lam_min;
        }
        model.weekdays[w] = g;
    }
    return model;
}

namespace {

std::array<double, 2> draw_bivariate(const WeekdayGaussian& g, Rng& rng) {
    // lower Cholesky of the 2x2 covariance
    const double l11 = std::sqrt(std::max(g.cov[0][0], 0.0));
    const double l21 = l11 > 0.0 ? g.cov[1][0] / l11 : 0.0;
    const double l22 = std::sqrt(std::max(g.cov[1][1] - l21 * l21, 0.0));
    const double z1 = rng.normal(), z2 = rng.normal();
    return {g.mean[0] + l11 * z1, g.mean[1] + l21 * z1 + l22 * z2};
}

Vector weekday_feature(int weekday, double comp_min, double comp_max) {
    Vector x(kCalibrateDim, 0.0);
    x[weekday] = 1.0;
    x[7] = comp_min;
    x[8] = comp_max;
    return x;
}

}  // namespace

std::optional<Vector> rejection_sample(const FeatureModel& model, const ModelParams& theta_true,
                                       const PriceBounds& bounds, int weekday, Rng& rng,
                                       long max_tries) {
    if (weekday < 0 || weekday > 6) throw std::invalid_argument("rejection_sample: bad weekday");
    for (long tries = 0; tries < max_tries; ++tries) {
        const auto comp = draw_bivariate(model.weekdays[weekday], rng);
        if (!(comp[0] < comp[1])) continue;
        const Vector x = weekday_feature(weekday, comp[0], comp[1]);
        // linear in p: positivity at both endpoints covers the whole interval
        if (mean_demand(theta_true, x, bounds.lower) > 0.0 &&
            mean_demand(theta_true, x, bounds.upper) > 0.0)
            return x;
    }
    return std::nullopt;
}

KrrModel krr_fit(const std::vector<Vector>& features, const Vector& targets, double gamma,
                 double alpha) {
    if (features.empty() || features.size() != targets.size())
        throw std::invalid_argument("krr_fit: features/targets mismatch");
    if (gamma <= 0.0 || alpha <= 0.0) throw std::invalid_argument("krr_fit: gamma, alpha must be > 0");
    const std::size_t n = features.size();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < features[i].size(); ++c) {
                const double diff = features[i][c] - features[j][c];
                sq += diff * diff;
            }
            k(i, j) = k(j, i) = std::exp(-gamma * sq);
        }
        k(i, i) += alpha;
    }
    SpdSolution sol = solve_spd(k, targets);
    return {features, std::move(sol.x), gamma, alpha};
}

double krr_predict(const KrrModel& model, const Vector& x) {
    double y = 0.0;
    for (std::size_t i = 0; i < model.support.size(); ++i) {
        double sq = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) {
            const double diff = model.support[i][c] - x[c];
            sq += diff * diff;
        }
        y += model.coefficients[i] * std::exp(-model.gamma * sq);
    }
    return y;
}

StaticPolicy offline_krr_policy(KrrModel model, PriceBounds bounds) {
    StaticPolicy policy;
    policy.name = "offline_krr";
    policy.price = [model = std::move(model), bounds](const Vector& x) {
        return clip(krr_predict(model, x), bounds);
    };
    return policy;
}

WeekdayCompetitorSampler::WeekdayCompetitorSampler(FeatureModel model, ModelParams theta_true,
                                                   PriceBounds bounds, long max_tries)
    : model_(std::move(model)),
      theta_(std::move(theta_true)),
      bounds_(bounds),
      max_tries_(max_tries) {
    if (theta_.dim() != kCalibrateDim)
        throw std::invalid_argument("WeekdayCompetitorSampler: theta must have d = 9");
}

Vector WeekdayCompetitorSampler::sample(Rng& rng) {
    const int w = next_weekday_;
    auto x = rejection_sample(model_, theta_, bounds_, w, rng, max_tries_);
    if (!x)
        throw Discarded("feature generation exhausted " + std::to_string(max_tries_) +
                        " tries on weekday " + std::to_string(w));
    next_weekday_ = (next_weekday_ + 1) % 7;
    return *x;
}

Environment build_environment(const ModelParams& theta_true, const FeatureModel& feature_model,
                              const PriceBounds& bounds, Rng& probe_rng) {
    // probe each weekday once so an unsuitable product is reported up front
    for (int w = 0; w < 7; ++w) {
        if (!rejection_sample(feature_model, theta_true, bounds, w, probe_rng))
            throw Discarded("product discarded: no acceptable feature on weekday " +
                            std::to_string(w));
    }
    auto sampler = std::make_shared<WeekdayCompetitorSampler>(feature_model, theta_true, bounds);
    return Environment(theta_true, bounds, NoiseModel::poisson(), std::move(sampler));
}

double best_feasible_price(const ModelParams& theta, const Vector& x, const PriceBounds& bounds) {
    const double slope = dot(x, theta.beta);
    const double rev_lo = expected_revenue(theta, x, bounds.lower);
    const double rev_hi = expected_revenue(theta, x, bounds.upper);
    if (slope < -kSlopeEpsilon) {
        const double p = clip(-dot(x, theta.alpha) / (2.0 * slope), bounds);
        return p;
    }
    return rev_hi >= rev_lo ? bounds.upper : bounds.lower;
}

RevenueEvaluation evaluate_policy_revenue(const PolicyKind& policy, Environment& env,
                                          long horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("evaluate_policy_revenue: horizon must be >= 1");
    RevenueEvaluation out;
    out.trace = run(policy, env, horizon, rng);
    out.oracle_revenue = out.trace.oracle_revenue;
    out.expected_revenue = out.trace.expected_revenue();
    return out;
}

double improvement_percent(double revenue, double baseline_revenue) {
    if (baseline_revenue == 0.0)
        throw std::invalid_argument("improvement_percent: zero baseline");
    return (revenue - baseline_revenue) / baseline_revenue * 100.0;
}

SyntheticProduct generate_synthetic_product(const SyntheticProductConfig& config, Rng& rng) {
    SyntheticProduct product;
    product.config = config;

    const PriceBounds& bounds = config.bounds;

    // Competitor-price law: per-weekday means drift around (5, 8), mild spread.
    FeatureModel fm;
    for (int w = 0; w < 7; ++w) {
        WeekdayGaussian g;
        g.mean[0] = 4.0 + 0.3 * w + rng.uniform(-0.5, 0.5);
        g.mean[1] = g.mean[0] + 2.0 + rng.uniform(0.0, 1.0);
        const double s1 = rng.uniform(0.3, 0.8), s2 = rng.uniform(0.3, 0.8);
        const double rho = rng.uniform(-0.2, 0.5);
        g.cov[0][0] = s1 * s1;
        g.cov[1][1] = s2 * s2;
        g.cov[0][1] = g.cov[1][0] = rho * s1 * s2;
        g.count = 0;
        fm.weekdays[w] = g;
    }
    product.feature_model = fm;

    // Ground truth with demand positive on [lower, upper] and interior optimum
    // for typical competitor prices.
    Vector alpha(kCalibrateDim, 0.0), beta(kCalibrateDim, 0.0);
    for (int w = 0; w < 7; ++w) {
        alpha[w] = rng.uniform(18.0, 26.0);
        beta[w] = -rng.uniform(1.2, 1.8);
    }
    alpha[7] = rng.uniform(0.1, 0.4);   // demand rises with competitor prices
    alpha[8] = rng.uniform(0.1, 0.3);
    beta[7] = rng.uniform(-0.02, 0.02);
    beta[8] = rng.uniform(-0.02, 0.02);
    product.theta_true = ModelParams(std::move(alpha), std::move(beta));

    product.records.reserve(config.n_records);
    Date date = config.start_date;
    for (long i = 0; i < config.n_records; ++i, date = date.next_day()) {
        const int w = date.weekday();
        auto comp = draw_bivariate(fm.weekdays[w], rng);
        if (comp[0] > comp[1]) std::swap(comp[0], comp[1]);
        const Vector x = weekday_feature(w, comp[0], comp[1]);
        // historical pricing anchors on the low competitor price with spread;
        // sellers track the market rather than the model optimum
        const double price = clip(0.9 * comp[0] + rng.uniform(-0.75, 0.75), bounds);
        const double mean = std::max(mean_demand(product.theta_true, x, price), 0.0);
        SalesRecord r;
        r.product_id = config.product_id;
        r.date = date;
        r.price = price;
        r.units_sold = static_cast<double>(rng.poisson(mean));
        r.comp_min = comp[0];
        r.comp_max = comp[1];
        r.min_allowed = bounds.lower;
        r.max_allowed = bounds.upper;
        product.records.push_back(std::move(r));
    }
    return product;
}

}  // namespace letc
