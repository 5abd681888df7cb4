#include "tree_grow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdm::detail {

namespace {

struct LeafStats {
    double estimate = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_treated = 0;
    bool usable = false;  // ipw_diff: both arms present
};

LeafStats leaf_stats(const std::vector<GrowRow>& rows, const std::vector<std::size_t>& idx,
                     const GrowConfig& cfg) {
    LeafStats stats;
    stats.n_samples = idx.size();
    for (std::size_t i : idx)
        if (rows[i].arm == 1) ++stats.n_treated;

    switch (cfg.leaf) {
        case LeafKind::mean_value: {
            double sum = 0.0;
            for (std::size_t i : idx) sum += rows[i].value;
            stats.estimate = sum / static_cast<double>(idx.size());
            stats.usable = !idx.empty();
            break;
        }
        case LeafKind::ipw_diff: {
            const std::size_t n1 = stats.n_treated;
            const std::size_t n0 = stats.n_samples - n1;
            if (n0 == 0 || n1 == 0) break;
            if (cfg.plain_diff) {
                double s0 = 0.0, s1 = 0.0;
                for (std::size_t i : idx) (rows[i].arm == 1 ? s1 : s0) += rows[i].y;
                stats.estimate = s1 / static_cast<double>(n1) - s0 / static_cast<double>(n0);
            } else {
                // Hajek-weighted difference in means.
                double s0 = 0.0, w0 = 0.0, s1 = 0.0, w1 = 0.0;
                for (std::size_t i : idx) {
                    const GrowRow& r = rows[i];
                    if (r.arm == 1) {
                        s1 += r.y / r.e;
                        w1 += 1.0 / r.e;
                    } else {
                        s0 += r.y / (1.0 - r.e);
                        w0 += 1.0 / (1.0 - r.e);
                    }
                }
                stats.estimate = s1 / w1 - s0 / w0;
            }
            stats.usable = true;
            break;
        }
        case LeafKind::weight_share: {
            double w0 = 0.0, w1 = 0.0;
            for (std::size_t i : idx) (rows[i].arm == 1 ? w1 : w0) += rows[i].weight;
            stats.estimate = w0 + w1 > 0.0 ? w1 / (w0 + w1) : 0.5;
            stats.usable = true;
            break;
        }
    }
    return stats;
}

double node_cost(const std::vector<GrowRow>& rows, const std::vector<std::size_t>& idx,
                 const GrowConfig& cfg) {
    if (cfg.criterion == Criterion::sse) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i : idx) {
            sum += rows[i].value;
            sumsq += rows[i].value * rows[i].value;
        }
        return sumsq - sum * sum / static_cast<double>(idx.size());
    }
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t i : idx) (rows[i].arm == 1 ? w1 : w0) += rows[i].weight;
    return std::min(w0, w1);
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
};

SplitCandidate best_split(const std::vector<GrowRow>& rows, const std::vector<std::size_t>& idx,
                          const GrowConfig& cfg) {
    const std::size_t n = idx.size();
    const double parent_cost = node_cost(rows, idx, cfg);
    SplitCandidate best;

    // totals for right-side stats
    double tot_sum = 0.0, tot_sumsq = 0.0, tot_w0 = 0.0, tot_w1 = 0.0;
    std::size_t tot_n0 = 0, tot_n1 = 0;
    for (std::size_t i : idx) {
        const GrowRow& r = rows[i];
        tot_sum += r.value;
        tot_sumsq += r.value * r.value;
        if (r.arm == 1) {
            ++tot_n1;
            tot_w1 += r.weight;
        } else {
            ++tot_n0;
            tot_w0 += r.weight;
        }
    }

    std::vector<std::size_t> order(idx);
    for (int j = 0; j < cfg.n_features; ++j) {
        std::sort(order.begin(), order.end(), [&rows, j](std::size_t a, std::size_t b) {
            const double xa = rows[a].x[j], xb = rows[b].x[j];
            return xa != xb ? xa < xb : a < b;
        });

        double sum = 0.0, sumsq = 0.0, w0 = 0.0, w1 = 0.0;
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const GrowRow& r = rows[order[i - 1]];
            sum += r.value;
            sumsq += r.value * r.value;
            if (r.arm == 1) {
                ++n1;
                w1 += r.weight;
            } else {
                ++n0;
                w0 += r.weight;
            }
            const double x_prev = rows[order[i - 1]].x[j];
            const double x_here = rows[order[i]].x[j];
            if (x_here <= x_prev) continue;  // candidate thresholds at distinct-value midpoints

            if (cfg.per_arm_min_leaf) {
                if (n0 < cfg.min_leaf || n1 < cfg.min_leaf || tot_n0 - n0 < cfg.min_leaf ||
                    tot_n1 - n1 < cfg.min_leaf)
                    continue;
            } else if (i < cfg.min_leaf || n - i < cfg.min_leaf) {
                continue;
            }

            double child_cost;
            if (cfg.criterion == Criterion::sse) {
                const double cost_l = sumsq - sum * sum / static_cast<double>(i);
                const double rsum = tot_sum - sum, rsumsq = tot_sumsq - sumsq;
                const double cost_r = rsumsq - rsum * rsum / static_cast<double>(n - i);
                child_cost = cost_l + cost_r;
            } else {
                child_cost = std::min(w0, w1) + std::min(tot_w0 - w0, tot_w1 - w1);
            }
            const double gain = parent_cost - child_cost;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = j;
                best.threshold = x_prev + (x_here - x_prev) / 2.0;
            }
        }
    }
    return best;
}

TreeNode grow(const std::vector<GrowRow>& rows, const std::vector<std::size_t>& idx, int depth,
              const GrowConfig& cfg) {
    const LeafStats stats = leaf_stats(rows, idx, cfg);
    TreeNode node;
    node.estimate = stats.estimate;
    node.n_samples = stats.n_samples;
    node.n_treated = stats.n_treated;
    if (depth >= cfg.max_depth || idx.size() < 2) return node;

    const SplitCandidate split = best_split(rows, idx, cfg);
    if (split.feature < 0 || !(split.gain > 0.0) || split.gain < cfg.min_split_gain) return node;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx)
        (rows[i].x[split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);

    node.feature_index = split.feature;
    node.threshold = split.threshold;
    node.left = std::make_unique<TreeNode>(grow(rows, left_idx, depth + 1, cfg));
    node.right = std::make_unique<TreeNode>(grow(rows, right_idx, depth + 1, cfg));
    return node;
}

void collect_and_refill(TreeNode& node, const std::vector<GrowRow>& rows,
                        std::vector<std::size_t> idx, const GrowConfig& cfg) {
    if (node.is_leaf()) {
        const LeafStats stats = leaf_stats(rows, idx, cfg);
        if (stats.usable && stats.n_samples > 0) {
            node.estimate = stats.estimate;
            node.n_samples = stats.n_samples;
            node.n_treated = stats.n_treated;
        }
        return;
    }
    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx)
        (rows[i].x[node.feature_index] <= node.threshold ? left_idx : right_idx).push_back(i);
    collect_and_refill(*node.left, rows, std::move(left_idx), cfg);
    collect_and_refill(*node.right, rows, std::move(right_idx), cfg);
}

}  // namespace

TreeNode grow_tree(const std::vector<GrowRow>& rows, const GrowConfig& config) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) idx[i] = i;
    return grow(rows, idx, 0, config);
}

void reestimate_leaves(TreeNode& node, const std::vector<GrowRow>& rows,
                       const GrowConfig& config) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) idx[i] = i;
    collect_and_refill(node, rows, std::move(idx), config);
}

}  // namespace cdm::detail
