#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdm/core.hpp"

namespace cdm {

struct EvaluationReport {
    std::string metric;
    double value = 0.0;
    std::optional<double> std_error;
    std::size_t n = 0;
    std::map<std::string, std::string> metadata;
};

/// Cumulative incremental outcome vs fraction targeted. Starts at (0, 0),
/// ends at fraction 1.
struct UpliftCurve {
    std::vector<std::pair<double, double>> points;  // (targeted_fraction, incremental_outcome)
    std::map<std::string, std::string> metadata;
};

/// Y* = y (t - e) / (e (1 - e)); under randomization E[Y*|X] equals the CATE.
double transformed_outcome(double y, TreatmentLevel t, double e);

/// Mean squared error against the transformed outcome. Equals the true
/// effect MSE plus a model-independent constant, so only differences
/// between models are meaningful (metadata carries comparative_only=true).
EvaluationReport effect_mse(const EffectModel& model, const Dataset& test);

/// mean(max(y0, y1) - potential_outcomes[policy(x)]); requires synthetic data.
EvaluationReport oracle_regret(const Policy& policy, const Dataset& synthetic_test);

/// Inverse-propensity-scored policy value on logged data:
/// mean(1{t == policy(x)} y / p(t|x)), with its standard error.
EvaluationReport ips_policy_value(const Policy& policy, const Dataset& logged);

/// Sorts units by score (descending, ties by dataset order); at each grid
/// fraction q the incremental outcome of the top ceil(qN) units S is
/// [mean(Y|S,T=1) - mean(Y|S,T=0)] * |S|. Grid points where an arm is empty
/// report 0 and set metadata["empty_arm_points"]. Requires a constant
/// propensity (randomized test data).
UpliftCurve uplift_curve(const std::vector<double>& score_per_unit, const Dataset& test,
                         int n_grid);

/// Trapezoidal area under the curve.
double auuc(const UpliftCurve& curve);

/// Fraction of units where policy(x) != 1{true_cate > 0}; requires synthetic data.
EvaluationReport decision_error_rate(const Policy& policy, const Dataset& synthetic_test);

}  // namespace cdm
