#include "cdm/trees.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "tree_grow.hpp"

namespace cdm {

namespace {

constexpr const char* kFormatVersion = "cdm-model-1";

std::vector<detail::GrowRow> causal_rows(const Dataset& train,
                                         const std::vector<std::size_t>& which) {
    std::vector<detail::GrowRow> rows;
    rows.reserve(which.size());
    for (std::size_t i : which) {
        const Sample& s = train[i];
        const double e = *s.propensity;
        detail::GrowRow r;
        r.x = s.features.data();
        r.arm = s.treatment;
        r.y = s.outcome;
        r.e = e;
        r.value = s.outcome * (s.treatment - e) / (e * (1.0 - e));  // transformed outcome
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

void TreeParams::validate() const {
    if (max_depth < 0) throw PreconditionError("tree params: max_depth must be >= 0");
    if (min_leaf < 1) throw PreconditionError("tree params: min_leaf must be >= 1");
    if (min_split_gain < 0.0) throw PreconditionError("tree params: min_split_gain must be >= 0");
}

const TreeNode& TreeNode::leaf_for(std::span<const double> x) const {
    const TreeNode* node = this;
    while (!node->is_leaf()) {
        if (static_cast<std::size_t>(node->feature_index) >= x.size())
            throw PreconditionError("tree: feature vector shorter than split feature index");
        node = x[node->feature_index] <= node->threshold ? node->left.get() : node->right.get();
    }
    return *node;
}

int TreeNode::depth() const {
    if (is_leaf()) return 0;
    return 1 + std::max(left->depth(), right->depth());
}

double OutcomeTree::predict_outcome(std::span<const double> x) const {
    return root_.leaf_for(x).estimate;
}

double CausalTree::predict_effect(std::span<const double> x) const {
    return root_.leaf_for(x).estimate;
}

double TwoModelEffect::predict_effect(std::span<const double> x) const {
    return arm1_->predict_outcome(x) - arm0_->predict_outcome(x);
}

TreatmentLevel PolicyTree::assign(std::span<const double> x) const {
    return root_.leaf_for(x).estimate > 0.5 ? 1 : 0;
}

double PolicyTree::score(std::span<const double> x) const {
    return root_.leaf_for(x).estimate - 0.5;
}

std::shared_ptr<OutcomeTree> fit_outcome_tree(const Dataset& train,
                                                    std::optional<TreatmentLevel> arm_filter,
                                                    const TreeParams& params) {
    params.validate();
    std::vector<detail::GrowRow> rows;
    for (const Sample& s : train.samples()) {
        if (arm_filter && s.treatment != *arm_filter) continue;
        detail::GrowRow r;
        r.x = s.features.data();
        r.value = s.outcome;
        r.arm = s.treatment;
        rows.push_back(r);
    }
    if (rows.empty()) throw PreconditionError("fit_outcome_tree: arm filter left no samples");
    if (rows.size() < 2 * params.min_leaf)
        throw PreconditionError("fit_outcome_tree: need at least 2*min_leaf samples");

    detail::GrowConfig cfg;
    cfg.criterion = detail::Criterion::sse;
    cfg.leaf = detail::LeafKind::mean_value;
    cfg.n_features = train.n_features();
    cfg.max_depth = params.max_depth;
    cfg.min_leaf = params.min_leaf;
    cfg.min_split_gain = params.min_split_gain;
    return std::make_shared<OutcomeTree>(detail::grow_tree(rows, cfg), train.n_features(),
                                         arm_filter);
}

std::shared_ptr<CausalTree> fit_causal_tree(const Dataset& train, const TreeParams& params) {
    params.validate();
    if (!train.has_propensities())
        throw PreconditionError(
            "fit_causal_tree: every sample needs a propensity (declare a column or a constant)");

    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), 0);

    std::vector<std::size_t> split_half = all, est_half;
    if (params.honest) {
        Rng rng(params.seed);
        rng.shuffle(split_half);
        const std::size_t cut = (split_half.size() + 1) / 2;
        est_half.assign(split_half.begin() + cut, split_half.end());
        split_half.resize(cut);
        std::sort(split_half.begin(), split_half.end());
        std::sort(est_half.begin(), est_half.end());
    }

    std::size_t n_treated = 0;
    for (std::size_t i : split_half) n_treated += train[i].treatment;
    if (n_treated == 0 || n_treated == split_half.size())
        throw PreconditionError("fit_causal_tree: both arms must be present");

    detail::GrowConfig cfg;
    cfg.criterion = detail::Criterion::sse;
    cfg.leaf = detail::LeafKind::ipw_diff;
    cfg.n_features = train.n_features();
    cfg.max_depth = params.max_depth;
    cfg.min_leaf = params.min_leaf;
    cfg.min_split_gain = params.min_split_gain;
    cfg.per_arm_min_leaf = true;
    cfg.plain_diff = train.constant_propensity().has_value();

    TreeNode root = detail::grow_tree(causal_rows(train, split_half), cfg);
    if (params.honest) detail::reestimate_leaves(root, causal_rows(train, est_half), cfg);
    return std::make_shared<CausalTree>(std::move(root), train.n_features());
}

std::shared_ptr<TwoModelEffect> fit_two_model(const Dataset& train,
                                                    const TreeParams& params) {
    return std::make_shared<TwoModelEffect>(fit_outcome_tree(train, 0, params),
                                            fit_outcome_tree(train, 1, params));
}

namespace {

template <typename Model, typename Fn>
std::vector<double> batch(const Model& model, const Dataset& dataset, int expected, Fn&& predict) {
    if (expected > 0 && expected != dataset.n_features())
        throw PreconditionError("predict_batch: feature-length mismatch");
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) out.push_back(predict(s.features));
    return out;
}

int known_features(const EffectModel& model) {
    if (auto* m = dynamic_cast<const CausalTree*>(&model)) return m->n_features();
    if (auto* m = dynamic_cast<const TwoModelEffect*>(&model)) return m->n_features();
    return 0;
}

int known_features(const OutcomeModel& model) {
    if (auto* m = dynamic_cast<const OutcomeTree*>(&model)) return m->n_features();
    return 0;
}

}  // namespace

std::vector<double> predict_batch(const EffectModel& model, const Dataset& dataset) {
    return batch(model, dataset, known_features(model),
                 [&model](std::span<const double> x) { return model.predict_effect(x); });
}

std::vector<double> predict_batch(const OutcomeModel& model, const Dataset& dataset) {
    return batch(model, dataset, known_features(model),
                 [&model](std::span<const double> x) { return model.predict_outcome(x); });
}

// --- serialization ---

namespace {

nlohmann::json node_to_json(const TreeNode& node) {
    nlohmann::json j;
    if (node.is_leaf()) {
        j["estimate"] = node.estimate;
        j["n_samples"] = node.n_samples;
        j["n_treated"] = node.n_treated;
    } else {
        j["feature_index"] = node.feature_index;
        j["threshold"] = node.threshold;
        j["left"] = node_to_json(*node.left);
        j["right"] = node_to_json(*node.right);
    }
    return j;
}

TreeNode node_from_json(const nlohmann::json& j) {
    TreeNode node;
    if (j.contains("feature_index")) {
        node.feature_index = j.at("feature_index").get<int>();
        node.threshold = j.at("threshold").get<double>();
        node.left = std::make_unique<TreeNode>(node_from_json(j.at("left")));
        node.right = std::make_unique<TreeNode>(node_from_json(j.at("right")));
    } else {
        node.estimate = j.at("estimate").get<double>();
        node.n_samples = j.at("n_samples").get<std::size_t>();
        node.n_treated = j.at("n_treated").get<std::size_t>();
    }
    return node;
}

nlohmann::json header(const char* kind, int n_features) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = kind;
    j["n_features"] = n_features;
    return j;
}

}  // namespace

nlohmann::json model_to_json(const OutcomeTree& model) {
    nlohmann::json j = header("outcome", model.n_features());
    if (model.arm()) j["arm"] = *model.arm();
    j["tree"] = node_to_json(model.root());
    return j;
}

nlohmann::json model_to_json(const CausalTree& model) {
    nlohmann::json j = header("causal", model.n_features());
    j["tree"] = node_to_json(model.root());
    return j;
}

nlohmann::json model_to_json(const TwoModelEffect& model) {
    nlohmann::json j = header("two_model", model.n_features());
    j["tree0"] = node_to_json(model.arm0().root());
    j["tree1"] = node_to_json(model.arm1().root());
    return j;
}

nlohmann::json model_to_json(const PolicyTree& model) {
    nlohmann::json j = header("policy", model.n_features());
    j["tree"] = node_to_json(model.root());
    return j;
}

LoadedModel model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format_version", "") != kFormatVersion)
        throw ConfigError("model document: unknown or missing format_version");
    LoadedModel loaded;
    loaded.kind = doc.at("kind").get<std::string>();
    loaded.n_features = doc.at("n_features").get<int>();
    if (loaded.kind == "outcome") {
        std::optional<TreatmentLevel> arm;
        if (doc.contains("arm")) arm = doc.at("arm").get<int>();
        loaded.outcome =
            std::make_shared<OutcomeTree>(node_from_json(doc.at("tree")), loaded.n_features, arm);
    } else if (loaded.kind == "causal") {
        loaded.effect =
            std::make_shared<CausalTree>(node_from_json(doc.at("tree")), loaded.n_features);
    } else if (loaded.kind == "two_model") {
        loaded.effect = std::make_shared<TwoModelEffect>(
            std::make_shared<OutcomeTree>(node_from_json(doc.at("tree0")), loaded.n_features, 0),
            std::make_shared<OutcomeTree>(node_from_json(doc.at("tree1")), loaded.n_features, 1));
    } else if (loaded.kind == "policy") {
        loaded.policy =
            std::make_shared<PolicyTree>(node_from_json(doc.at("tree")), loaded.n_features);
    } else {
        throw ConfigError("model document: unknown kind '" + loaded.kind + "'");
    }
    return loaded;
}

void save_model(const nlohmann::json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failure on '" + path + "'");
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("model '" + path + "': " + e.what());
    }
    return model_from_json(doc);
}

}  // namespace cdm
