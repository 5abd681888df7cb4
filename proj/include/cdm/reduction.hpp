#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "cdm/core.hpp"
#include "cdm/trees.hpp"

namespace cdm {

struct WeightedExample {
    FeatureVector features;
    TreatmentLevel label = 0;  // the observed treatment
    double weight = 0.0;
};

struct WeightedClassificationSet {
    std::vector<WeightedExample> examples;
    int n_features = 0;
    double outcome_offset = 0.0;  // shift applied to make outcomes non-negative
};

/// Zadrozny-style reduction: sample (x, t, y) becomes example
/// (x, label = t, weight = (y + c) / p(t|x)) with c = max(0, -min y).
/// Every sample must carry a propensity.
WeightedClassificationSet to_weighted_classification(const Dataset& dataset);

/// Greedy classification tree minimizing weighted misclassification; the
/// returned policy assigns a leaf's majority-weight label.
std::shared_ptr<PolicyTree> fit_policy_tree(const WeightedClassificationSet& wset,
                                                  const TreeParams& params);

/// Both sides of the regret/weighted-error identity, per sample:
///   match_value   = mean over samples of 1{t == policy(x)} (y+c)/p(t|x)
///   weighted_error = mean over samples of 1{t != policy(x)} (y+c)/p(t|x)
/// Their sum is the policy-independent IPS mass mean((y+c)/p(t|x)).
/// match_value is the IPS policy value computed on the offset outcomes.
struct RegretEquivalence {
    double weighted_error = 0.0;
    double ips_value = 0.0;
};

RegretEquivalence regret_equivalence_check(const Dataset& dataset, const Policy& policy);

}  // namespace cdm
