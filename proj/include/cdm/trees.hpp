#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "cdm/core.hpp"

namespace cdm {

struct TreeParams {
    int max_depth = 3;
    std::size_t min_leaf = 1;      // per-arm for causal trees
    double min_split_gain = 0.0;
    bool honest = false;           // causal only: disjoint split/estimate halves
    std::uint64_t seed = 0;
    void validate() const;
};

/// Axis-aligned binary tree. x[feature_index] <= threshold routes left.
/// Leaves have feature_index < 0; `estimate` is the leaf mean outcome,
/// the leaf effect, or the label-1 weight share, depending on the model.
struct TreeNode {
    int feature_index = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left, right;
    double estimate = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_treated = 0;

    bool is_leaf() const { return feature_index < 0; }
    const TreeNode& leaf_for(std::span<const double> x) const;
    int depth() const;
};

class OutcomeTree final : public OutcomeModel {
public:
    OutcomeTree(TreeNode root, int n_features, std::optional<TreatmentLevel> arm)
        : root_(std::move(root)), n_features_(n_features), arm_(arm) {}
    double predict_outcome(std::span<const double> x) const override;
    const TreeNode& root() const { return root_; }
    int n_features() const { return n_features_; }
    std::optional<TreatmentLevel> arm() const { return arm_; }

private:
    TreeNode root_;
    int n_features_;
    std::optional<TreatmentLevel> arm_;
};

class CausalTree final : public EffectModel {
public:
    CausalTree(TreeNode root, int n_features) : root_(std::move(root)), n_features_(n_features) {}
    double predict_effect(std::span<const double> x) const override;
    const TreeNode& root() const { return root_; }
    int n_features() const { return n_features_; }

private:
    TreeNode root_;
    int n_features_;
};

/// T-learner: difference of two per-arm outcome trees.
class TwoModelEffect final : public EffectModel {
public:
    TwoModelEffect(std::shared_ptr<OutcomeTree> arm0, std::shared_ptr<OutcomeTree> arm1)
        : arm0_(std::move(arm0)), arm1_(std::move(arm1)) {}
    double predict_effect(std::span<const double> x) const override;
    const OutcomeTree& arm0() const { return *arm0_; }
    const OutcomeTree& arm1() const { return *arm1_; }
    int n_features() const { return arm0_->n_features(); }

private:
    std::shared_ptr<OutcomeTree> arm0_, arm1_;
};

/// Weighted-classification tree: leaf estimate is the weight share of
/// label 1; assign treats when the share exceeds 1/2 (ties to control).
class PolicyTree final : public Policy {
public:
    PolicyTree(TreeNode root, int n_features) : root_(std::move(root)), n_features_(n_features) {}
    TreatmentLevel assign(std::span<const double> x) const override;
    double score(std::span<const double> x) const override;
    const TreeNode& root() const { return root_; }
    int n_features() const { return n_features_; }

private:
    TreeNode root_;
    int n_features_;
};

/// CART regression tree on the observed outcome, optionally restricted to
/// one arm; leaf estimate = mean outcome, splits by SSE reduction.
std::shared_ptr<OutcomeTree> fit_outcome_tree(const Dataset& train,
                                                    std::optional<TreatmentLevel> arm_filter,
                                                    const TreeParams& params);

/// Greedy CATE tree: splits by transformed-outcome SSE reduction, leaf
/// estimate is the (inverse-propensity-weighted) difference in means.
/// Requires both arms and known propensities.
std::shared_ptr<CausalTree> fit_causal_tree(const Dataset& train, const TreeParams& params);

std::shared_ptr<TwoModelEffect> fit_two_model(const Dataset& train, const TreeParams& params);

std::vector<double> predict_batch(const EffectModel& model, const Dataset& dataset);
std::vector<double> predict_batch(const OutcomeModel& model, const Dataset& dataset);

// --- JSON model exchange (shared by the CLI and the reduction module) ---

struct LoadedModel {
    std::string kind;  // "outcome" | "causal" | "two_model" | "policy"
    int n_features = 0;
    OutcomeModelPtr outcome;
    EffectModelPtr effect;
    PolicyPtr policy;
};

nlohmann::json model_to_json(const OutcomeTree& model);
nlohmann::json model_to_json(const CausalTree& model);
nlohmann::json model_to_json(const TwoModelEffect& model);
nlohmann::json model_to_json(const PolicyTree& model);

LoadedModel model_from_json(const nlohmann::json& doc);
void save_model(const nlohmann::json& doc, const std::string& path);
LoadedModel load_model(const std::string& path);

}  // namespace cdm
