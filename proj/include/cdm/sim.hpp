#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdm/core.hpp"
#include "cdm/eval.hpp"
#include "cdm/synth.hpp"
#include "cdm/trees.hpp"

namespace cdm {

/// One biased-model / unbiased-model decision scenario: Gaussian sampling
/// distributions of an effect estimate, decision = treat iff estimate > tau.
struct ScenarioConfig {
    std::string name;
    double true_effect = 1.0;
    double threshold = 0.0;
    double bm_mean = 0.0;
    double bm_sd = 0.35;
    double um_mean = 1.0;
    double um_sd = 0.7;
    std::size_t n_draws = 100000;
    std::uint64_t seed = 0;
    void validate() const;
};

struct ScenarioResult {
    std::string name;
    double bm_wrong_rate = 0.0;
    double um_wrong_rate = 0.0;
    double bm_wrong_analytic = 0.0;
    double um_wrong_analytic = 0.0;
    TreatmentLevel correct_action = 1;
};

/// P(wrong decision) for a Gaussian estimate: the mass on the wrong side of
/// tau. When the correct action is to treat, this is Phi((tau - mean)/sd).
double analytic_wrong_prob(double mean, double sd, double tau, bool correct_is_treat);

ScenarioResult run_scenario(const ScenarioConfig& config);

/// The three stock panels: true effect 1, tau 0, unbiased model (1, 0.7),
/// biased model sd 0.35 with means -0.2 / 0.5 / 1.5 (large opposite bias,
/// small opposite bias, reinforcing bias).
std::vector<ScenarioConfig> default_scenarios(std::size_t n_draws = 100000,
                                              std::uint64_t seed = 0);

/// Confounded-vs-experimental training. Per replication, a confounded
/// training set (true propensities hidden, the learner is handed the
/// nominal constant) and an RCT training set are drawn from the same
/// potential-outcome DGP; the same causal-tree learner is fitted on each
/// and both threshold policies are scored by oracle regret on a fresh RCT
/// test set.
struct ConfoundingExperimentConfig {
    DgpConfig dgp;  // confounding_strength > 0 for a truly confounded arm
    std::size_t n_confounded = 0;
    std::size_t n_experimental = 0;
    std::size_t n_test = 20000;
    TreeParams learner;
    int n_reps = 1;
    double tau = 0.0;
    std::uint64_t seed = 0;
};

struct ConfoundingExperimentResult {
    std::vector<double> confounded_regret;    // one entry per replication
    std::vector<double> experimental_regret;
    double confounded_win_rate = 0.0;         // strictly lower regret
};

ConfoundingExperimentResult run_confounding_experiment(const ConfoundingExperimentConfig& config);

/// Proxy-target comparison: per replication and train size, fit an outcome
/// tree on control-arm conversions, a causal tree, and a
/// weighted-classification policy tree; score a held-out randomized test
/// set and compare uplift curves / AUUC.
struct CriteoLikeConfig {
    std::size_t n_samples = 0;
    double treat_rate = 0.85;
    double outcome_snr = 2.0;
    double effect_snr = 0.5;
    double effect_outcome_corr = 0.8;
    std::uint64_t seed = 0;
};

struct ProxyExperimentConfig {
    CriteoLikeConfig generator;            // used when `data` is empty
    std::optional<Dataset> data;           // alternative: resample a loaded RCT dataset
    std::vector<std::size_t> train_sizes;
    std::size_t n_test = 20000;
    TreeParams learner;
    int n_reps = 1;
    int n_grid = 20;
    std::uint64_t seed = 0;
};

struct ProxyRepResult {
    std::size_t train_size = 0;
    int rep = 0;
    double auuc_outcome = 0.0;
    double auuc_causal = 0.0;
    double auuc_policy = 0.0;
    UpliftCurve curve_outcome, curve_causal, curve_policy;
};

struct ProxyExperimentResult {
    std::vector<ProxyRepResult> reps;  // ordered by (train_size, rep)
};

ProxyExperimentResult run_proxy_experiment(const ProxyExperimentConfig& config);

}  // namespace cdm
