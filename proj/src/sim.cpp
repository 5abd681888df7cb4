#include "cdm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdm/reduction.hpp"

namespace cdm {

void ScenarioConfig::validate() const {
    if (!(bm_sd > 0.0) || !(um_sd > 0.0))
        throw PreconditionError("scenario: standard deviations must be positive");
    if (n_draws < 1) throw PreconditionError("scenario: n_draws must be >= 1");
    if (!std::isfinite(true_effect) || !std::isfinite(threshold))
        throw PreconditionError("scenario: non-finite parameter");
}

double analytic_wrong_prob(double mean, double sd, double tau, bool correct_is_treat) {
    if (!(sd > 0.0)) throw PreconditionError("analytic_wrong_prob: sd must be positive");
    const double z = (tau - mean) / sd;
    return correct_is_treat ? normal_cdf(z) : 1.0 - normal_cdf(z);
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    config.validate();
    const bool correct_is_treat = config.true_effect > config.threshold;

    Rng rng(config.seed);
    std::size_t bm_wrong = 0, um_wrong = 0;
    for (std::size_t i = 0; i < config.n_draws; ++i) {
        const double bm = config.bm_mean + config.bm_sd * rng.normal();
        const double um = config.um_mean + config.um_sd * rng.normal();
        const bool bm_treats = bm > config.threshold;
        const bool um_treats = um > config.threshold;
        if (bm_treats != correct_is_treat) ++bm_wrong;
        if (um_treats != correct_is_treat) ++um_wrong;
    }

    ScenarioResult result;
    result.name = config.name;
    result.correct_action = correct_is_treat ? 1 : 0;
    result.bm_wrong_rate = static_cast<double>(bm_wrong) / static_cast<double>(config.n_draws);
    result.um_wrong_rate = static_cast<double>(um_wrong) / static_cast<double>(config.n_draws);
    result.bm_wrong_analytic =
        analytic_wrong_prob(config.bm_mean, config.bm_sd, config.threshold, correct_is_treat);
    result.um_wrong_analytic =
        analytic_wrong_prob(config.um_mean, config.um_sd, config.threshold, correct_is_treat);
    return result;
}

std::vector<ScenarioConfig> default_scenarios(std::size_t n_draws, std::uint64_t seed) {
    ScenarioConfig base;
    base.true_effect = 1.0;
    base.threshold = 0.0;
    base.um_mean = 1.0;
    base.um_sd = 0.7;
    base.bm_sd = 0.35;
    base.n_draws = n_draws;

    std::vector<ScenarioConfig> panels(3, base);
    panels[0].name = "large_opposite_bias";
    panels[0].bm_mean = -0.2;
    panels[1].name = "small_opposite_bias";
    panels[1].bm_mean = 0.5;
    panels[2].name = "reinforcing_bias";
    panels[2].bm_mean = 1.5;
    for (std::size_t i = 0; i < panels.size(); ++i) panels[i].seed = seed + i;
    return panels;
}

ConfoundingExperimentResult run_confounding_experiment(const ConfoundingExperimentConfig& config) {
    if (config.n_reps < 1)
        throw PreconditionError("confounding experiment: n_reps must be >= 1");
    if (config.n_confounded < 2 * config.learner.min_leaf ||
        config.n_experimental < 2 * config.learner.min_leaf)
        throw PreconditionError(
            "confounding experiment: training sizes must be at least 2*min_leaf");

    const std::size_t reps = static_cast<std::size_t>(config.n_reps);
    ConfoundingExperimentResult result;
    result.confounded_regret.resize(reps);
    result.experimental_regret.resize(reps);

    parallel_for(reps, [&config, &result](std::size_t rep) {
        Rng seeder(config.seed + rep);
        const std::uint64_t conf_seed = seeder.next_u64();
        const std::uint64_t exp_seed = seeder.next_u64();
        const std::uint64_t test_seed = seeder.next_u64();

        DgpConfig conf_cfg = config.dgp;
        conf_cfg.n_samples = config.n_confounded;
        conf_cfg.seed = conf_seed;
        conf_cfg.hide_propensity = true;
        Dataset conf_raw = conf_cfg.confounding_strength > 0.0
                               ? gen_confounded(conf_cfg)
                               : gen_rct([&conf_cfg]() {
                                     DgpConfig c = conf_cfg;
                                     c.confounding_strength = 0.0;
                                     return c;
                                 }());
        // Misled by design: the learner sees only the nominal constant rate.
        const Dataset conf_train = with_constant_propensity(conf_raw, config.dgp.propensity);

        DgpConfig exp_cfg = config.dgp;
        exp_cfg.n_samples = config.n_experimental;
        exp_cfg.seed = exp_seed;
        exp_cfg.confounding_strength = 0.0;
        exp_cfg.hide_propensity = false;
        const Dataset exp_train = gen_rct(exp_cfg);

        DgpConfig test_cfg = config.dgp;
        test_cfg.n_samples = config.n_test;
        test_cfg.seed = test_seed;
        test_cfg.confounding_strength = 0.0;
        test_cfg.hide_propensity = false;
        const Dataset test = gen_rct(test_cfg);

        const PolicyPtr conf_policy =
            threshold_policy(fit_causal_tree(conf_train, config.learner), config.tau);
        const PolicyPtr exp_policy =
            threshold_policy(fit_causal_tree(exp_train, config.learner), config.tau);

        result.confounded_regret[rep] = oracle_regret(*conf_policy, test).value;
        result.experimental_regret[rep] = oracle_regret(*exp_policy, test).value;
    });

    std::size_t wins = 0;
    for (std::size_t rep = 0; rep < reps; ++rep)
        if (result.confounded_regret[rep] < result.experimental_regret[rep]) ++wins;
    result.confounded_win_rate = static_cast<double>(wins) / static_cast<double>(reps);
    return result;
}

namespace {

Dataset criteo_from(const CriteoLikeConfig& g, std::size_t n, std::uint64_t seed) {
    return gen_criteo_like(n, g.treat_rate, g.outcome_snr, g.effect_snr, g.effect_outcome_corr,
                           seed);
}

Dataset resample(const Dataset& pool, std::size_t n, std::size_t skip, Rng& rng,
                 std::vector<std::size_t>& shuffled) {
    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) samples.push_back(pool[shuffled[skip + i]]);
    return Dataset(std::move(samples), pool.n_features(), pool.name() + "/resample",
                   pool.is_synthetic());
}

}  // namespace

ProxyExperimentResult run_proxy_experiment(const ProxyExperimentConfig& config) {
    if (config.n_reps < 1) throw PreconditionError("proxy experiment: n_reps must be >= 1");
    if (config.train_sizes.empty())
        throw PreconditionError("proxy experiment: no train sizes given");
    if (config.data && !config.data->constant_propensity())
        throw PreconditionError(
            "proxy experiment: loaded data must be randomized (constant propensity)");

    const std::size_t reps = static_cast<std::size_t>(config.n_reps);
    const std::size_t tasks = config.train_sizes.size() * reps;
    ProxyExperimentResult result;
    result.reps.resize(tasks);

    parallel_for(tasks, [&config, &result, reps](std::size_t task) {
        const std::size_t size_idx = task / reps;
        const std::size_t rep = task % reps;
        const std::size_t train_size = config.train_sizes[size_idx];

        Rng seeder(config.seed + rep);
        const std::uint64_t train_seed = seeder.next_u64() + size_idx;
        const std::uint64_t test_seed = seeder.next_u64();

        std::optional<Dataset> train, test;
        if (config.data) {
            if (train_size + config.n_test > config.data->size())
                throw PreconditionError("proxy experiment: dataset too small for train+test");
            std::vector<std::size_t> idx(config.data->size());
            std::iota(idx.begin(), idx.end(), 0);
            Rng rng(train_seed);
            rng.shuffle(idx);
            train = resample(*config.data, train_size, 0, rng, idx);
            test = resample(*config.data, config.n_test, train_size, rng, idx);
        } else {
            train = criteo_from(config.generator, train_size, train_seed);
            test = criteo_from(config.generator, config.n_test, test_seed);
        }

        ProxyRepResult r;
        r.train_size = train_size;
        r.rep = static_cast<int>(rep);

        const auto outcome_model = fit_outcome_tree(*train, 0, config.learner);
        const auto causal_model = fit_causal_tree(*train, config.learner);
        const auto policy_model =
            fit_policy_tree(to_weighted_classification(*train), config.learner);

        const std::vector<double> outcome_scores = predict_batch(*outcome_model, *test);
        const std::vector<double> causal_scores = predict_batch(*causal_model, *test);
        std::vector<double> policy_scores;
        policy_scores.reserve(test->size());
        for (const Sample& s : test->samples()) policy_scores.push_back(policy_model->score(s.features));

        r.curve_outcome = uplift_curve(outcome_scores, *test, config.n_grid);
        r.curve_causal = uplift_curve(causal_scores, *test, config.n_grid);
        r.curve_policy = uplift_curve(policy_scores, *test, config.n_grid);
        r.auuc_outcome = auuc(r.curve_outcome);
        r.auuc_causal = auuc(r.curve_causal);
        r.auuc_policy = auuc(r.curve_policy);
        result.reps[task] = std::move(r);
    });
    return result;
}

}  // namespace cdm
