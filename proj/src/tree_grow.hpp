#pragma once

// Internal greedy tree-growing engine shared by the outcome tree, the
// causal tree, and the weighted-classification policy tree.

#include <vector>

#include "cdm/trees.hpp"

namespace cdm::detail {

struct GrowRow {
    const double* x = nullptr;  // feature vector (n_features wide)
    double value = 0.0;         // SSE target (y or transformed outcome)
    double weight = 0.0;        // wclass example weight
    int arm = 0;                // treatment arm, or the class label for wclass
    double y = 0.0;             // observed outcome (causal leaf estimates)
    double e = 0.0;             // propensity (causal leaf estimates)
};

enum class Criterion { sse, wclass };
enum class LeafKind { mean_value, ipw_diff, weight_share };

struct GrowConfig {
    Criterion criterion = Criterion::sse;
    LeafKind leaf = LeafKind::mean_value;
    int n_features = 0;
    int max_depth = 0;
    std::size_t min_leaf = 1;
    double min_split_gain = 0.0;
    bool per_arm_min_leaf = false;  // causal: min_leaf applies to each arm per child
    bool plain_diff = false;        // constant propensity: unweighted difference in means
};

TreeNode grow_tree(const std::vector<GrowRow>& rows, const GrowConfig& config);

/// Honest re-fill: route `rows` through the fitted structure and replace
/// each leaf estimate (and counts) with statistics computed from them.
/// Leaves that receive no usable rows keep their split-half estimate.
void reestimate_leaves(TreeNode& node, const std::vector<GrowRow>& rows,
                       const GrowConfig& config);

}  // namespace cdm::detail
