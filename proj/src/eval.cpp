#include "cdm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdm/util.hpp"

namespace cdm {

namespace {

void require_synthetic(const Dataset& d, const char* op) {
    if (!d.is_synthetic())
        throw PreconditionError(std::string(op) + ": requires a synthetic dataset");
}

void require_propensities(const Dataset& d, const char* op) {
    if (!d.has_propensities())
        throw PreconditionError(std::string(op) + ": every sample needs a propensity");
}

double std_error_of_mean(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

double transformed_outcome(double y, TreatmentLevel t, double e) {
    if (!(e > 0.0 && e < 1.0))
        throw PreconditionError("transformed_outcome: propensity must lie in (0,1)");
    return y * (static_cast<double>(t) - e) / (e * (1.0 - e));
}

EvaluationReport effect_mse(const EffectModel& model, const Dataset& test) {
    require_propensities(test, "effect_mse");
    std::vector<double> sq;
    sq.reserve(test.size());
    for (const Sample& s : test.samples()) {
        const double ystar = transformed_outcome(s.outcome, s.treatment, *s.propensity);
        const double err = ystar - model.predict_effect(s.features);
        sq.push_back(err * err);
    }
    EvaluationReport report;
    report.metric = "effect_mse";
    report.n = test.size();
    report.value = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size());
    report.std_error = std_error_of_mean(sq, report.value);
    report.metadata["comparative_only"] = "true";
    return report;
}

EvaluationReport oracle_regret(const Policy& policy, const Dataset& synthetic_test) {
    require_synthetic(synthetic_test, "oracle_regret");
    std::vector<double> gaps;
    gaps.reserve(synthetic_test.size());
    for (const Sample& s : synthetic_test.samples()) {
        const auto& po = *s.potential_outcomes;
        gaps.push_back(std::max(po[0], po[1]) - po[policy.assign(s.features)]);
    }
    EvaluationReport report;
    report.metric = "oracle_regret";
    report.n = synthetic_test.size();
    report.value = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    report.std_error = std_error_of_mean(gaps, report.value);
    return report;
}

EvaluationReport ips_policy_value(const Policy& policy, const Dataset& logged) {
    require_propensities(logged, "ips_policy_value");
    std::vector<double> summands;
    summands.reserve(logged.size());
    for (const Sample& s : logged.samples()) {
        const double p = s.treatment == 1 ? *s.propensity : 1.0 - *s.propensity;
        summands.push_back(policy.assign(s.features) == s.treatment ? s.outcome / p : 0.0);
    }
    EvaluationReport report;
    report.metric = "ips_policy_value";
    report.n = logged.size();
    report.value =
        std::accumulate(summands.begin(), summands.end(), 0.0) / static_cast<double>(summands.size());
    report.std_error = std_error_of_mean(summands, report.value);
    return report;
}

UpliftCurve uplift_curve(const std::vector<double>& score_per_unit, const Dataset& test,
                         int n_grid) {
    if (score_per_unit.size() != test.size())
        throw PreconditionError("uplift_curve: score vector length mismatch");
    if (n_grid < 1) throw PreconditionError("uplift_curve: n_grid must be >= 1");
    if (!test.constant_propensity())
        throw PreconditionError(
            "uplift_curve: requires randomized test data (constant propensity)");
    for (double v : score_per_unit)
        if (!std::isfinite(v)) throw PreconditionError("uplift_curve: non-finite score");

    const std::size_t n = test.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&score_per_unit](std::size_t a, std::size_t b) {
        return score_per_unit[a] > score_per_unit[b];
    });

    // prefix sums over the ranked order
    std::vector<double> sum1(n + 1, 0.0), sum0(n + 1, 0.0);
    std::vector<std::size_t> cnt1(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = test[order[i]];
        sum1[i + 1] = sum1[i] + (s.treatment == 1 ? s.outcome : 0.0);
        sum0[i + 1] = sum0[i] + (s.treatment == 0 ? s.outcome : 0.0);
        cnt1[i + 1] = cnt1[i] + (s.treatment == 1 ? 1 : 0);
    }

    UpliftCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    int empty_arm_points = 0;
    for (int k = 1; k <= n_grid; ++k) {
        const double q = static_cast<double>(k) / n_grid;
        const std::size_t top = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
        const std::size_t n1 = cnt1[top], n0 = top - n1;
        double incremental = 0.0;
        if (n1 == 0 || n0 == 0) {
            ++empty_arm_points;
        } else {
            incremental = (sum1[top] / static_cast<double>(n1) - sum0[top] / static_cast<double>(n0)) *
                          static_cast<double>(top);
        }
        curve.points.emplace_back(q, incremental);
    }
    if (empty_arm_points > 0)
        curve.metadata["empty_arm_points"] = std::to_string(empty_arm_points);
    curve.metadata["n"] = std::to_string(n);
    return curve;
}

double auuc(const UpliftCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& [q0, v0] = curve.points[i - 1];
        const auto& [q1, v1] = curve.points[i];
        area += (q1 - q0) * (v0 + v1) / 2.0;
    }
    return area;
}

EvaluationReport decision_error_rate(const Policy& policy, const Dataset& synthetic_test) {
    require_synthetic(synthetic_test, "decision_error_rate");
    std::size_t errors = 0;
    for (const Sample& s : synthetic_test.samples()) {
        const TreatmentLevel best = *s.true_cate > 0.0 ? 1 : 0;
        if (policy.assign(s.features) != best) ++errors;
    }
    EvaluationReport report;
    report.metric = "decision_error_rate";
    report.n = synthetic_test.size();
    report.value = static_cast<double>(errors) / static_cast<double>(synthetic_test.size());
    return report;
}

}  // namespace cdm
