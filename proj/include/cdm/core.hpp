#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdm/util.hpp"

namespace cdm {

/// Treatment levels are small non-negative integers; 0 is "do not treat".
/// The toolkit is binary throughout (n_levels == 2).
using TreatmentLevel = int;

using FeatureVector = std::vector<double>;

/// One unit. `propensity` is P(T=1 | X) under the logging mechanism, when
/// known. `potential_outcomes` / `true_cate` are populated only for
/// synthetic data; the invariant is
///   outcome == potential_outcomes[treatment]
///   true_cate == potential_outcomes[1] - potential_outcomes[0].
struct Sample {
    FeatureVector features;
    TreatmentLevel treatment = 0;
    double outcome = 0.0;
    std::optional<double> propensity;
    std::optional<std::array<double, 2>> potential_outcomes;
    std::optional<double> true_cate;
};

/// Immutable collection of samples with a shared schema.
class Dataset {
public:
    Dataset(std::vector<Sample> samples, int n_features, std::string name, bool is_synthetic);

    const std::vector<Sample>& samples() const { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const { return samples_.size(); }
    int n_features() const { return n_features_; }
    int n_levels() const { return 2; }
    const std::string& name() const { return name_; }
    bool is_synthetic() const { return is_synthetic_; }

    /// True when every sample carries the same propensity value.
    std::optional<double> constant_propensity() const;
    bool has_propensities() const;

private:
    std::vector<Sample> samples_;
    int n_features_;
    std::string name_;
    bool is_synthetic_;
};

/// Scores features with an estimate of the CATE f(x). Deterministic.
class EffectModel {
public:
    virtual ~EffectModel() = default;
    virtual double predict_effect(std::span<const double> x) const = 0;
};

/// Scores features with an estimate of E[Y(i)|X=x] for the arm i the model
/// was fitted on. Deterministic.
class OutcomeModel {
public:
    virtual ~OutcomeModel() = default;
    virtual double predict_outcome(std::span<const double> x) const = 0;
};

/// Maps features to a treatment level; `score` is the ranking signal used
/// by uplift curves.
class Policy {
public:
    virtual ~Policy() = default;
    virtual TreatmentLevel assign(std::span<const double> x) const = 0;
    virtual double score(std::span<const double> x) const { return 0.0; }
};

using PolicyPtr = std::shared_ptr<Policy>;
using EffectModelPtr = std::shared_ptr<EffectModel>;
using OutcomeModelPtr = std::shared_ptr<OutcomeModel>;

/// Treat when the predicted effect strictly exceeds tau; ties go to control.
/// score(x) = predict_effect(x) - tau.
PolicyPtr threshold_policy(EffectModelPtr model, double tau);

/// Treat when the predicted outcome strictly exceeds tau (proxy targeting).
/// score(x) = predict_outcome(x).
PolicyPtr outcome_policy(OutcomeModelPtr model, double tau);

/// Assigns `level` everywhere; score(x) = 0.
PolicyPtr fixed_policy(TreatmentLevel level);

}  // namespace cdm
