#include "cdm/core.hpp"

#include <cmath>
#include <utility>

namespace cdm {

Dataset::Dataset(std::vector<Sample> samples, int n_features, std::string name, bool is_synthetic)
    : samples_(std::move(samples)),
      n_features_(n_features),
      name_(std::move(name)),
      is_synthetic_(is_synthetic) {
    if (samples_.empty()) throw PreconditionError("dataset '" + name_ + "' is empty");
    if (n_features_ <= 0) throw PreconditionError("dataset '" + name_ + "': n_features must be positive");
    for (const Sample& s : samples_) {
        if (static_cast<int>(s.features.size()) != n_features_)
            throw PreconditionError("dataset '" + name_ + "': feature length mismatch");
        for (double v : s.features)
            if (!std::isfinite(v)) throw PreconditionError("dataset '" + name_ + "': non-finite feature");
        if (s.treatment < 0 || s.treatment >= 2)
            throw PreconditionError("dataset '" + name_ + "': treatment outside {0,1}");
        if (!std::isfinite(s.outcome))
            throw PreconditionError("dataset '" + name_ + "': non-finite outcome");
        if (s.propensity && !(*s.propensity > 0.0 && *s.propensity < 1.0))
            throw PreconditionError("dataset '" + name_ + "': propensity outside (0,1)");
        if (is_synthetic_) {
            if (!s.potential_outcomes || !s.true_cate)
                throw PreconditionError("dataset '" + name_ + "': synthetic sample lacks potential outcomes");
            if (s.outcome != (*s.potential_outcomes)[s.treatment])
                throw PreconditionError("dataset '" + name_ + "': outcome != potential_outcomes[treatment]");
        }
    }
}

std::optional<double> Dataset::constant_propensity() const {
    if (!samples_[0].propensity) return std::nullopt;
    const double e = *samples_[0].propensity;
    for (const Sample& s : samples_)
        if (!s.propensity || *s.propensity != e) return std::nullopt;
    return e;
}

bool Dataset::has_propensities() const {
    for (const Sample& s : samples_)
        if (!s.propensity) return false;
    return true;
}

namespace {

class ThresholdPolicy final : public Policy {
public:
    ThresholdPolicy(EffectModelPtr model, double tau) : model_(std::move(model)), tau_(tau) {}
    TreatmentLevel assign(std::span<const double> x) const override {
        return model_->predict_effect(x) > tau_ ? 1 : 0;
    }
    double score(std::span<const double> x) const override {
        return model_->predict_effect(x) - tau_;
    }

private:
    EffectModelPtr model_;
    double tau_;
};

class OutcomePolicy final : public Policy {
public:
    OutcomePolicy(OutcomeModelPtr model, double tau) : model_(std::move(model)), tau_(tau) {}
    TreatmentLevel assign(std::span<const double> x) const override {
        return model_->predict_outcome(x) > tau_ ? 1 : 0;
    }
    double score(std::span<const double> x) const override { return model_->predict_outcome(x); }

private:
    OutcomeModelPtr model_;
    double tau_;
};

class FixedPolicy final : public Policy {
public:
    explicit FixedPolicy(TreatmentLevel level) : level_(level) {}
    TreatmentLevel assign(std::span<const double>) const override { return level_; }

private:
    TreatmentLevel level_;
};

}  // namespace

PolicyPtr threshold_policy(EffectModelPtr model, double tau) {
    if (!model) throw PreconditionError("threshold_policy: null model");
    if (!std::isfinite(tau)) throw PreconditionError("threshold_policy: tau must be finite");
    return std::make_shared<ThresholdPolicy>(std::move(model), tau);
}

PolicyPtr outcome_policy(OutcomeModelPtr model, double tau) {
    if (!model) throw PreconditionError("outcome_policy: null model");
    if (!std::isfinite(tau)) throw PreconditionError("outcome_policy: tau must be finite");
    return std::make_shared<OutcomePolicy>(std::move(model), tau);
}

PolicyPtr fixed_policy(TreatmentLevel level) {
    if (level < 0 || level >= 2) throw PreconditionError("fixed_policy: level outside {0,1}");
    return std::make_shared<FixedPolicy>(level);
}

}  // namespace cdm
