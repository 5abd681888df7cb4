#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "cdm/synth.hpp"
#include "cdm/trees.hpp"

using namespace cdm;

namespace {

Dataset one_arm(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
    std::vector<Sample> rows(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        rows[i].features = xs[i];
        rows[i].treatment = 0;
        rows[i].outcome = ys[i];
        rows[i].propensity = 0.5;
    }
    return Dataset(std::move(rows), static_cast<int>(xs[0].size()), "one_arm", false);
}

// Exhaustive depth-<=depth SSE of the best piecewise-constant axis tree,
// computed by brute force over midpoint thresholds. Independent of the
// greedy grower: at depth 1 greedy == optimal, which is what we pin.
double best_depth1_sse(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    const int d = static_cast<int>(xs[0].size());
    auto sse_of = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        double m = 0.0;
        for (auto i : idx) m += ys[i];
        m /= static_cast<double>(idx.size());
        double s = 0.0;
        for (auto i : idx) s += (ys[i] - m) * (ys[i] - m);
        return s;
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    double best = sse_of(all);
    for (int j = 0; j < d; ++j) {
        std::vector<double> vals;
        for (const auto& x : xs) vals.push_back(x[j]);
        std::sort(vals.begin(), vals.end());
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (vals[k] == vals[k + 1]) continue;
            const double thr = 0.5 * (vals[k] + vals[k + 1]);
            std::vector<std::size_t> l, r;
            for (std::size_t i = 0; i < n; ++i) (xs[i][j] <= thr ? l : r).push_back(i);
            best = std::min(best, sse_of(l) + sse_of(r));
        }
    }
    return best;
}

double tree_sse(const OutcomeTree& tree, const std::vector<std::vector<double>>& xs,
                const std::vector<double>& ys) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double p = tree.predict_outcome(xs[i]);
        s += (ys[i] - p) * (ys[i] - p);
    }
    return s;
}

}  // namespace

TEST_CASE("depth-1 outcome tree matches the brute-force SSE oracle") {
    Rng rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (int i = 0; i < 16; ++i) {
            xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
            ys.push_back(rng.normal());
        }
        TreeParams p;
        p.max_depth = 1;
        const auto tree = fit_outcome_tree(one_arm(xs, ys), std::nullopt, p);
        REQUIRE(tree_sse(*tree, xs, ys) ==
                doctest::Approx(best_depth1_sse(xs, ys)).epsilon(1e-9));
    }
}

TEST_CASE("constant outcomes produce a single leaf at the mean") {
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) {
        xs.push_back({static_cast<double>(i)});
        ys.push_back(3.25);
    }
    TreeParams p;
    p.max_depth = 4;
    const auto tree = fit_outcome_tree(one_arm(xs, ys), std::nullopt, p);
    CHECK(tree->root().is_leaf());
    CHECK(tree->root().estimate == doctest::Approx(3.25));
}

TEST_CASE("separable step function is recovered exactly") {
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 20; ++i) {
        const double x = (i - 9.5) / 10.0;
        xs.push_back({x, 0.0});
        ys.push_back(x <= 0 ? -2.0 : 5.0);
    }
    TreeParams p;
    p.max_depth = 3;
    const auto tree = fit_outcome_tree(one_arm(xs, ys), std::nullopt, p);
    CHECK(tree->root().feature_index == 0);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(tree->predict_outcome(xs[i]) == doctest::Approx(ys[i]));
}

TEST_CASE("deeper trees never fit worse on the training data") {
    Rng rng(7);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 64; ++i) {
        xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        ys.push_back(std::sin(3 * xs.back()[0]) + rng.normal() * 0.1);
    }
    const auto d = one_arm(xs, ys);
    double prev = std::numeric_limits<double>::infinity();
    for (int depth = 0; depth <= 5; ++depth) {
        TreeParams p;
        p.max_depth = depth;
        const auto tree = fit_outcome_tree(d, std::nullopt, p);
        const double sse = tree_sse(*tree, xs, ys);
        CHECK(sse <= prev + 1e-9);
        prev = sse;
    }
}

TEST_CASE("min_leaf is respected") {
    Rng rng(9);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 40; ++i) {
        xs.push_back({rng.uniform(-1, 1)});
        ys.push_back(rng.normal());
    }
    TreeParams p;
    p.max_depth = 6;
    p.min_leaf = 7;
    const auto tree = fit_outcome_tree(one_arm(xs, ys), std::nullopt, p);
    std::function<void(const TreeNode&)> walk = [&](const TreeNode& node) {
        if (node.is_leaf()) {
            CHECK(node.n_samples >= 7);
            return;
        }
        walk(*node.left);
        walk(*node.right);
    };
    walk(tree->root());
}

TEST_CASE("tie-break picks the lowest feature index, then lowest threshold") {
    // Feature 1 duplicates feature 0, so gains tie exactly.
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 8; ++i) {
        const double x = i < 4 ? -1.0 + 0.1 * i : 1.0 + 0.1 * i;
        xs.push_back({x, x});
        ys.push_back(i < 4 ? 0.0 : 1.0);
    }
    TreeParams p;
    p.max_depth = 1;
    const auto tree = fit_outcome_tree(one_arm(xs, ys), std::nullopt, p);
    CHECK(tree->root().feature_index == 0);
}

TEST_CASE("arm filter restricts the fit") {
    DgpConfig c;
    c.n_samples = 2000;
    c.n_features = 1;
    c.baseline_coefs = {0.0};
    c.effect_coefs = {0.0};
    c.baseline_intercept = 1.0;
    c.effect_intercept = 10.0;  // treated mean 11, control mean 1
    c.seed = 3;
    const auto d = gen_rct(c);
    TreeParams p;
    p.max_depth = 2;
    CHECK(fit_outcome_tree(d, 0, p)->predict_outcome(std::vector<double>{0.0}) ==
          doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit_outcome_tree(d, 1, p)->predict_outcome(std::vector<double>{0.0}) ==
          doctest::Approx(11.0).epsilon(0.05));
}

TEST_CASE("depth-0 causal tree estimate equals the IPW ATE exactly") {
    DgpConfig c;
    c.n_samples = 500;
    c.n_features = 2;
    c.baseline_coefs = {1.0, 0.0};
    c.effect_coefs = {0.0, 2.0};
    c.outcome_noise_sd = 0.5;
    c.seed = 17;
    const auto d = gen_rct(c);
    TreeParams p;
    p.max_depth = 0;
    const auto tree = fit_causal_tree(d, p);
    // Constant propensity 0.5: leaf estimate is the plain difference in means.
    double sy1 = 0, sy0 = 0;
    std::size_t n1 = 0, n0 = 0;
    for (const auto& s : d.samples()) {
        if (s.treatment == 1) { sy1 += s.outcome; ++n1; }
        else { sy0 += s.outcome; ++n0; }
    }
    CHECK(tree->predict_effect(std::vector<double>{0.0, 0.0}) ==
          doctest::Approx(sy1 / n1 - sy0 / n0).epsilon(1e-12));
}

TEST_CASE("causal tree estimates under non-constant propensity use Hajek IPW") {
    // Two strata with different true propensities recorded per sample; the
    // depth-0 estimate must be the Hajek-weighted contrast, not the raw
    // difference in means.
    std::vector<Sample> rows;
    auto add = [&](double x, int t, double y, double e) {
        Sample s;
        s.features = {x};
        s.treatment = t;
        s.outcome = y;
        s.propensity = e;
        rows.push_back(s);
    };
    add(0.0, 1, 2.0, 0.8);
    add(0.1, 0, 1.0, 0.8);
    add(0.2, 1, 3.0, 0.2);
    add(0.3, 0, 0.5, 0.2);
    const Dataset d(rows, 1, "strata", false);
    TreeParams p;
    p.max_depth = 0;
    const auto tree = fit_causal_tree(d, p);
    // Hajek: treated mean = (2/0.8 + 3/0.2)/(1/0.8 + 1/0.2),
    //        control mean = (1/0.2 + 0.5/0.8)/(1/0.2 + 1/0.8).
    const double t_mean = (2.0 / 0.8 + 3.0 / 0.2) / (1.0 / 0.8 + 1.0 / 0.2);
    const double c_mean = (1.0 / 0.2 + 0.5 / 0.8) / (1.0 / 0.2 + 1.0 / 0.8);
    CHECK(tree->predict_effect(std::vector<double>{0.0}) ==
          doctest::Approx(t_mean - c_mean).epsilon(1e-12));
}

TEST_CASE("causal tree recovers a two-subgroup effect") {
    DgpConfig c;
    c.n_samples = 4000;
    c.n_features = 2;
    c.baseline_coefs = {0.0, 0.0};
    c.effect_coefs = {0.0, 0.0};
    c.seed = 23;
    // Build the subgroup structure by hand: effect +1 when x0 > 0 else -1.
    auto base = gen_rct(c);
    std::vector<Sample> rows;
    for (const auto& s : base.samples()) {
        Sample r = s;
        const double f = r.features[0] > 0 ? 1.0 : -1.0;
        const double y0 = 0.0;
        r.potential_outcomes = {y0, y0 + f};
        r.true_cate = f;
        r.outcome = (*r.potential_outcomes)[r.treatment];
        rows.push_back(std::move(r));
    }
    const Dataset d(rows, 2, "subgroups", true);
    TreeParams p;
    p.max_depth = 1;
    p.min_leaf = 20;
    const auto tree = fit_causal_tree(d, p);
    REQUIRE(!tree->root().is_leaf());
    CHECK(tree->root().feature_index == 0);
    CHECK(tree->predict_effect(std::vector<double>{0.5, 0.0}) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(tree->predict_effect(std::vector<double>{-0.5, 0.0}) ==
          doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("causal tree preconditions") {
    // No propensities.
    std::vector<Sample> rows(4);
    for (int i = 0; i < 4; ++i) {
        rows[i].features = {static_cast<double>(i)};
        rows[i].treatment = i % 2;
        rows[i].outcome = i;
    }
    CHECK_THROWS_AS(fit_causal_tree(Dataset(rows, 1, "noprop", false), TreeParams{}),
                    PreconditionError);
    // Single arm.
    for (auto& r : rows) {
        r.treatment = 1;
        r.propensity = 0.5;
    }
    CHECK_THROWS_AS(fit_causal_tree(Dataset(rows, 1, "onearm", false), TreeParams{}),
                    PreconditionError);
}

TEST_CASE("honest causal tree differs from adaptive and stays deterministic") {
    DgpConfig c;
    c.n_samples = 3000;
    c.n_features = 2;
    c.baseline_coefs = {1.0, 0.0};
    c.effect_coefs = {2.0, 0.0};
    c.outcome_noise_sd = 1.0;
    c.seed = 31;
    const auto d = gen_rct(c);
    TreeParams honest;
    honest.max_depth = 3;
    honest.min_leaf = 10;
    honest.honest = true;
    honest.seed = 5;
    auto adaptive = honest;
    adaptive.honest = false;
    const auto h1 = fit_causal_tree(d, honest);
    const auto h2 = fit_causal_tree(d, honest);
    const auto a = fit_causal_tree(d, adaptive);
    bool h_vs_a_differ = false, h_repeatable = true;
    Rng probe(99);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{probe.uniform(-1, 1), probe.uniform(-1, 1)};
        h_vs_a_differ |= (h1->predict_effect(x) != a->predict_effect(x));
        h_repeatable &= (h1->predict_effect(x) == h2->predict_effect(x));
    }
    CHECK(h_vs_a_differ);
    CHECK(h_repeatable);
}

TEST_CASE("two-model effect is the difference of per-arm trees") {
    DgpConfig c;
    c.n_samples = 3000;
    c.n_features = 1;
    c.baseline_coefs = {2.0};
    c.effect_coefs = {1.0};
    c.outcome_noise_sd = 0.2;
    c.seed = 37;
    const auto d = gen_rct(c);
    TreeParams p;
    p.max_depth = 3;
    p.min_leaf = 10;
    const auto tm = fit_two_model(d, p);
    Rng probe(1);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x{probe.uniform(-1, 1)};
        REQUIRE(tm->predict_effect(x) ==
                doctest::Approx(tm->arm1().predict_outcome(x) - tm->arm0().predict_outcome(x))
                    .epsilon(1e-12));
    }
}

TEST_CASE("predict_batch validates the feature width") {
    DgpConfig c;
    c.n_samples = 100;
    c.n_features = 2;
    c.baseline_coefs = {1.0, 0.0};
    c.effect_coefs = {0.0, 1.0};
    c.seed = 2;
    const auto d = gen_rct(c);
    const auto tree = fit_causal_tree(d, TreeParams{});
    c.n_features = 3;
    c.baseline_coefs = {1.0, 0.0, 0.0};
    c.effect_coefs = {0.0, 1.0, 0.0};
    const auto wide = gen_rct(c);
    CHECK_THROWS_AS(predict_batch(static_cast<const EffectModel&>(*tree), wide),
                    PreconditionError);
    const auto preds = predict_batch(static_cast<const EffectModel&>(*tree), d);
    REQUIRE(preds.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        REQUIRE(preds[i] == tree->predict_effect(d[i].features));
}

TEST_CASE("model JSON round trip for every kind") {
    DgpConfig c;
    c.n_samples = 1500;
    c.n_features = 2;
    c.baseline_coefs = {1.0, -1.0};
    c.effect_coefs = {0.5, 0.5};
    c.outcome_noise_sd = 0.3;
    c.seed = 41;
    const auto d = gen_rct(c);
    TreeParams p;
    p.max_depth = 3;
    p.min_leaf = 5;
    const auto path = (std::filesystem::temp_directory_path() / "cdm_model_rt.json").string();

    Rng probe(77);
    std::vector<std::vector<double>> grid;
    for (int i = 0; i < 100; ++i) grid.push_back({probe.uniform(-1, 1), probe.uniform(-1, 1)});

    SUBCASE("outcome") {
        const auto m = fit_outcome_tree(d, 1, p);
        save_model(model_to_json(*m), path);
        const auto back = load_model(path);
        REQUIRE(back.kind == "outcome");
        for (const auto& x : grid)
            REQUIRE(back.outcome->predict_outcome(x) == m->predict_outcome(x));
    }
    SUBCASE("causal") {
        const auto m = fit_causal_tree(d, p);
        save_model(model_to_json(*m), path);
        const auto back = load_model(path);
        REQUIRE(back.kind == "causal");
        for (const auto& x : grid)
            REQUIRE(back.effect->predict_effect(x) == m->predict_effect(x));
    }
    SUBCASE("two_model") {
        const auto m = fit_two_model(d, p);
        save_model(model_to_json(*m), path);
        const auto back = load_model(path);
        REQUIRE(back.kind == "two_model");
        for (const auto& x : grid)
            REQUIRE(back.effect->predict_effect(x) == m->predict_effect(x));
    }
    std::filesystem::remove(path);
}

TEST_CASE("load_model rejects malformed documents") {
    CHECK_THROWS_AS(model_from_json(nlohmann::json{{"kind", "outcome"}}), ConfigError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json{{"format_version", "cdm-model-1"},
                                                   {"kind", "martian"},
                                                   {"n_features", 2}}),
                    ConfigError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}

TEST_CASE("tree params validation") {
    TreeParams p;
    p.max_depth = -1;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = TreeParams{};
    p.min_leaf = 0;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = TreeParams{};
    p.min_split_gain = -0.5;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
}
