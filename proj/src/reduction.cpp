#include "cdm/reduction.hpp"

#include <algorithm>
#include <cmath>

#include "tree_grow.hpp"

namespace cdm {

namespace {

double assignment_prob(const Sample& s) {
    const double e = *s.propensity;
    return s.treatment == 1 ? e : 1.0 - e;
}

}  // namespace

WeightedClassificationSet to_weighted_classification(const Dataset& dataset) {
    if (!dataset.has_propensities())
        throw PreconditionError(
            "to_weighted_classification: every sample needs a propensity; declare a propensity "
            "column or a constant (randomization is never assumed)");

    double min_outcome = dataset[0].outcome;
    for (const Sample& s : dataset.samples()) min_outcome = std::min(min_outcome, s.outcome);
    const double offset = std::max(0.0, -min_outcome);

    WeightedClassificationSet wset;
    wset.n_features = dataset.n_features();
    wset.outcome_offset = offset;
    wset.examples.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) {
        WeightedExample ex;
        ex.features = s.features;
        ex.label = s.treatment;
        ex.weight = (s.outcome + offset) / assignment_prob(s);
        wset.examples.push_back(std::move(ex));
    }
    return wset;
}

std::shared_ptr<PolicyTree> fit_policy_tree(const WeightedClassificationSet& wset,
                                                  const TreeParams& params) {
    params.validate();
    if (wset.examples.empty()) throw PreconditionError("fit_policy_tree: empty example set");
    double total_weight = 0.0;
    for (const WeightedExample& ex : wset.examples) {
        if (!(ex.weight >= 0.0) || !std::isfinite(ex.weight))
            throw PreconditionError("fit_policy_tree: weights must be finite and non-negative");
        total_weight += ex.weight;
    }
    if (!(total_weight > 0.0))
        throw PreconditionError("fit_policy_tree: total weight is zero (no signal)");

    std::vector<detail::GrowRow> rows;
    rows.reserve(wset.examples.size());
    for (const WeightedExample& ex : wset.examples) {
        detail::GrowRow r;
        r.x = ex.features.data();
        r.arm = ex.label;
        r.weight = ex.weight;
        rows.push_back(r);
    }

    detail::GrowConfig cfg;
    cfg.criterion = detail::Criterion::wclass;
    cfg.leaf = detail::LeafKind::weight_share;
    cfg.n_features = wset.n_features;
    cfg.max_depth = params.max_depth;
    cfg.min_leaf = params.min_leaf;
    cfg.min_split_gain = params.min_split_gain;
    return std::make_shared<PolicyTree>(detail::grow_tree(rows, cfg), wset.n_features);
}

RegretEquivalence regret_equivalence_check(const Dataset& dataset, const Policy& policy) {
    const WeightedClassificationSet wset = to_weighted_classification(dataset);
    RegretEquivalence result;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const WeightedExample& ex = wset.examples[i];
        if (policy.assign(ex.features) == ex.label)
            result.ips_value += ex.weight;
        else
            result.weighted_error += ex.weight;
    }
    const double n = static_cast<double>(dataset.size());
    result.ips_value /= n;
    result.weighted_error /= n;
    return result;
}

}  // namespace cdm
