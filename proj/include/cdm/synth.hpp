#pragma once

#include <cstdint>
#include <vector>

#include "cdm/core.hpp"

namespace cdm {

enum class OutcomeKind { continuous, bernoulli };
enum class ConfoundingDirection { opposing, reinforcing };

/// Linear-index DGP. Baseline mean is
///   mu0(x) = baseline_intercept + baseline_coefs . x
/// and the treatment effect index is
///   f(x) = effect_intercept + effect_coefs . x.
/// Continuous outcomes share one noise draw across arms, so true_cate == f(x)
/// exactly; bernoulli outcomes share one uniform across arms
/// (Y(i) = 1{u < logistic(mu_i)}), so f == 0 implies true_cate == 0.
struct DgpConfig {
    std::size_t n_samples = 0;
    int n_features = 0;
    std::vector<double> baseline_coefs;
    std::vector<double> effect_coefs;
    double baseline_intercept = 0.0;
    double effect_intercept = 0.0;
    double outcome_noise_sd = 0.0;
    OutcomeKind outcome_kind = OutcomeKind::continuous;
    double propensity = 0.5;                  // P(T=1) in RCT mode / nominal rate
    double confounding_strength = 0.0;        // gamma; 0 = RCT
    ConfoundingDirection confounding_direction = ConfoundingDirection::opposing;
    bool hide_propensity = false;             // blank the propensity field (confounded mode)
    std::uint64_t seed = 0;
};

/// Randomized experiment: X ~ U[-1,1]^d, T ~ Bernoulli(propensity)
/// independent of everything, propensity recorded on every sample.
/// Requires confounding_strength == 0.
Dataset gen_rct(const DgpConfig& config);

/// Same potential-outcome DGP, but
///   T ~ Bernoulli(logistic(logit(propensity) + gamma * s(x)))
/// with s = mu0 (selection on baseline, "opposing") or s = f (selection on
/// gains, "reinforcing"). The true assignment probability is stored in the
/// propensity field unless hide_propensity is set. Requires gamma > 0.
Dataset gen_confounded(const DgpConfig& config);

/// Criteo-style regime: 11 features, rare bernoulli conversions, randomized
/// treatment at treat_rate, baseline signal stronger than effect signal
/// (outcome_snr > effect_snr), and corr(f, mu0) controlled by
/// effect_outcome_corr.
Dataset gen_criteo_like(std::size_t n_samples, double treat_rate, double outcome_snr,
                        double effect_snr, double effect_outcome_corr, std::uint64_t seed);

/// Exact policy value from potential outcomes:
/// mean over units of potential_outcomes[policy.assign(x)].
double oracle_policy_value(const Dataset& dataset, const Policy& policy);

/// Copy of `dataset` with every sample's propensity overwritten. Used to
/// hand a learner a nominal (possibly wrong) constant propensity.
Dataset with_constant_propensity(const Dataset& dataset, double e);

}  // namespace cdm
