#include "cdm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cdm {

namespace {

void validate_common(const DgpConfig& c) {
    if (c.n_samples == 0) throw PreconditionError("dgp: n_samples must be positive");
    if (c.n_features <= 0) throw PreconditionError("dgp: n_features must be positive");
    if (static_cast<int>(c.baseline_coefs.size()) != c.n_features ||
        static_cast<int>(c.effect_coefs.size()) != c.n_features)
        throw PreconditionError("dgp: coefficient vectors must have length n_features");
    for (double v : c.baseline_coefs)
        if (!std::isfinite(v)) throw PreconditionError("dgp: non-finite baseline coefficient");
    for (double v : c.effect_coefs)
        if (!std::isfinite(v)) throw PreconditionError("dgp: non-finite effect coefficient");
    if (!std::isfinite(c.baseline_intercept) || !std::isfinite(c.effect_intercept))
        throw PreconditionError("dgp: non-finite intercept");
    if (!(c.propensity > 0.0 && c.propensity < 1.0))
        throw PreconditionError("dgp: propensity must lie in (0,1)");
    if (c.outcome_noise_sd < 0.0) throw PreconditionError("dgp: outcome_noise_sd must be >= 0");
}

double dot(const std::vector<double>& w, const std::vector<double>& x) {
    return std::inner_product(w.begin(), w.end(), x.begin(), 0.0);
}

Dataset generate(const DgpConfig& c, const std::string& name) {
    Rng rng(c.seed);
    std::vector<Sample> samples;
    samples.reserve(c.n_samples);
    const bool confounded = c.confounding_strength > 0.0;
    const double base_logit = logit(c.propensity);

    for (std::size_t i = 0; i < c.n_samples; ++i) {
        Sample s;
        s.features.resize(c.n_features);
        for (double& v : s.features) v = rng.uniform(-1.0, 1.0);

        const double mu0 = c.baseline_intercept + dot(c.baseline_coefs, s.features);
        const double f = c.effect_intercept + dot(c.effect_coefs, s.features);

        double y0, y1;
        if (c.outcome_kind == OutcomeKind::continuous) {
            // One shared noise draw per unit, so true_cate == f(x) exactly.
            const double eps = c.outcome_noise_sd * rng.normal();
            y0 = mu0 + eps;
            y1 = mu0 + f + eps;
        } else {
            // Comonotone coupling: both potential outcomes from one uniform.
            const double u = rng.uniform();
            y0 = u < logistic(mu0) ? 1.0 : 0.0;
            y1 = u < logistic(mu0 + f) ? 1.0 : 0.0;
        }

        double e = c.propensity;
        if (confounded) {
            const double sel =
                c.confounding_direction == ConfoundingDirection::reinforcing ? f : mu0;
            e = logistic(base_logit + c.confounding_strength * sel);
        }
        s.treatment = rng.bernoulli(e) ? 1 : 0;
        if (!c.hide_propensity) s.propensity = e;
        s.potential_outcomes = {y0, y1};
        s.true_cate = y1 - y0;
        s.outcome = s.treatment == 1 ? y1 : y0;
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples), c.n_features, name, /*is_synthetic=*/true);
}

}  // namespace

Dataset gen_rct(const DgpConfig& config) {
    validate_common(config);
    if (config.confounding_strength != 0.0)
        throw PreconditionError("gen_rct: confounding_strength must be 0 (use gen_confounded)");
    return generate(config, "rct");
}

Dataset gen_confounded(const DgpConfig& config) {
    validate_common(config);
    if (!(config.confounding_strength > 0.0))
        throw PreconditionError("gen_confounded: confounding_strength must be > 0");
    return generate(config, "confounded");
}

namespace {

constexpr int kCriteoFeatures = 11;
constexpr double kCriteoBaseRate = 0.1;    // marginal conversion rate scale
constexpr double kCriteoEffectScale = 0.1; // effect amplitude per unit of effect_snr

std::vector<double> normalized(std::vector<double> v) {
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double n = std::sqrt(n2);
    for (double& x : v) x /= n;
    return v;
}

}  // namespace

Dataset gen_criteo_like(std::size_t n_samples, double treat_rate, double outcome_snr,
                        double effect_snr, double effect_outcome_corr, std::uint64_t seed) {
    if (n_samples == 0) throw PreconditionError("gen_criteo_like: n_samples must be positive");
    if (!(treat_rate > 0.0 && treat_rate < 1.0))
        throw PreconditionError("gen_criteo_like: treat_rate must lie in (0,1)");
    if (!(outcome_snr > effect_snr && effect_snr > 0.0))
        throw PreconditionError("gen_criteo_like: requires outcome_snr > effect_snr > 0");
    if (!(std::abs(effect_outcome_corr) <= 1.0))
        throw PreconditionError("gen_criteo_like: |effect_outcome_corr| must be <= 1");

    Rng rng(seed);

    // Unit direction for the baseline index, and an effect direction at the
    // requested correlation with it. The directions are fixed characteristics
    // of the generator (seeded by a constant, not by `seed`), so datasets
    // drawn with different seeds share the same outcome/effect surfaces:
    // a model fitted on one draw faces the same population on the next.
    Rng dir_rng(0x5caff01d2026ull);
    std::vector<double> b_dir(kCriteoFeatures), e_raw(kCriteoFeatures);
    for (double& v : b_dir) v = dir_rng.normal();
    b_dir = normalized(b_dir);
    for (double& v : e_raw) v = dir_rng.normal();
    const double proj = std::inner_product(e_raw.begin(), e_raw.end(), b_dir.begin(), 0.0);
    for (int j = 0; j < kCriteoFeatures; ++j) e_raw[j] -= proj * b_dir[j];
    std::vector<double> e_dir(kCriteoFeatures);
    if (std::abs(effect_outcome_corr) == 1.0) {
        for (int j = 0; j < kCriteoFeatures; ++j) e_dir[j] = effect_outcome_corr * b_dir[j];
    } else {
        const std::vector<double> perp = normalized(std::move(e_raw));
        const double c = effect_outcome_corr, srt = std::sqrt(1.0 - c * c);
        for (int j = 0; j < kCriteoFeatures; ++j) e_dir[j] = c * b_dir[j] + srt * perp[j];
    }

    // For X ~ U[-1,1]^d and a unit direction w, var(w . X) = 1/3.
    const double index_sd = std::sqrt(1.0 / 3.0);
    const double base_logit = logit(kCriteoBaseRate);

    std::vector<Sample> samples;
    samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        Sample s;
        s.features.resize(kCriteoFeatures);
        for (double& v : s.features) v = rng.uniform(-1.0, 1.0);
        const double z_b = dot(b_dir, s.features) / index_sd;
        const double z_e = dot(e_dir, s.features) / index_sd;
        const double p0 = logistic(base_logit + outcome_snr * z_b);
        const double f = kCriteoEffectScale * effect_snr * z_e;
        const double p1 = std::clamp(p0 + f, 0.0, 1.0);
        const double u = rng.uniform();
        const double y0 = u < p0 ? 1.0 : 0.0;
        const double y1 = u < p1 ? 1.0 : 0.0;
        s.treatment = rng.bernoulli(treat_rate) ? 1 : 0;
        s.propensity = treat_rate;
        s.potential_outcomes = {y0, y1};
        s.true_cate = y1 - y0;
        s.outcome = s.treatment == 1 ? y1 : y0;
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples), kCriteoFeatures, "criteo_like", /*is_synthetic=*/true);
}

double oracle_policy_value(const Dataset& dataset, const Policy& policy) {
    if (!dataset.is_synthetic())
        throw PreconditionError("oracle_policy_value: requires a synthetic dataset");
    double total = 0.0;
    for (const Sample& s : dataset.samples()) {
        const TreatmentLevel a = policy.assign(s.features);
        total += (*s.potential_outcomes)[a];
    }
    return total / static_cast<double>(dataset.size());
}

Dataset with_constant_propensity(const Dataset& dataset, double e) {
    if (!(e > 0.0 && e < 1.0))
        throw PreconditionError("with_constant_propensity: e must lie in (0,1)");
    std::vector<Sample> samples = dataset.samples();
    for (Sample& s : samples) s.propensity = e;
    return Dataset(std::move(samples), dataset.n_features(), dataset.name(),
                   dataset.is_synthetic());
}

}  // namespace cdm
