// Python bindings for the main operations: data generation, tree fitting,
// policies, and the evaluation metrics.

#include <fstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cdm/eval.hpp"
#include "cdm/ingest.hpp"
#include "cdm/reduction.hpp"
#include "cdm/sim.hpp"
#include "cdm/synth.hpp"
#include "cdm/trees.hpp"

namespace py = pybind11;
using namespace cdm;

namespace {

std::vector<int> assign_batch(const Policy& policy, const Dataset& dataset) {
    std::vector<int> out;
    out.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) out.push_back(policy.assign(s.features));
    return out;
}

std::vector<double> score_batch(const Policy& policy, const Dataset& dataset) {
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) out.push_back(policy.score(s.features));
    return out;
}

}  // namespace

PYBIND11_MODULE(_cdm, m) {
    m.doc() = "causal decision making toolkit";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<IoError>(m, "IoError");
    py::register_exception<PreconditionError>(m, "PreconditionError");

    py::class_<Sample>(m, "Sample")
        .def(py::init<>())
        .def_readwrite("features", &Sample::features)
        .def_readwrite("treatment", &Sample::treatment)
        .def_readwrite("outcome", &Sample::outcome)
        .def_readwrite("propensity", &Sample::propensity)
        .def_readwrite("potential_outcomes", &Sample::potential_outcomes)
        .def_readwrite("true_cate", &Sample::true_cate);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<std::vector<Sample>, int, std::string, bool>(), py::arg("samples"),
             py::arg("n_features"), py::arg("name") = "dataset",
             py::arg("is_synthetic") = false)
        .def("__len__", &Dataset::size)
        .def("__getitem__",
             [](const Dataset& d, std::size_t i) {
                 if (i >= d.size()) throw py::index_error();
                 return d[i];
             })
        .def_property_readonly("n_features", &Dataset::n_features)
        .def_property_readonly("name", &Dataset::name)
        .def_property_readonly("is_synthetic", &Dataset::is_synthetic)
        .def_property_readonly("constant_propensity", &Dataset::constant_propensity);

    py::class_<Policy, PolicyPtr>(m, "Policy")
        .def("assign",
             [](const Policy& p, const std::vector<double>& x) { return p.assign(x); })
        .def("score", [](const Policy& p, const std::vector<double>& x) { return p.score(x); })
        .def("assign_batch", &assign_batch)
        .def("score_batch", &score_batch);

    py::class_<EffectModel, EffectModelPtr>(m, "EffectModel")
        .def("predict_effect", [](const EffectModel& model, const std::vector<double>& x) {
            return model.predict_effect(x);
        });
    py::class_<OutcomeModel, OutcomeModelPtr>(m, "OutcomeModel")
        .def("predict_outcome", [](const OutcomeModel& model, const std::vector<double>& x) {
            return model.predict_outcome(x);
        });

    py::class_<OutcomeTree, OutcomeModel, std::shared_ptr<OutcomeTree>>(m, "OutcomeTree");
    py::class_<CausalTree, EffectModel, std::shared_ptr<CausalTree>>(m, "CausalTree");
    py::class_<TwoModelEffect, EffectModel, std::shared_ptr<TwoModelEffect>>(m, "TwoModelEffect");
    py::class_<PolicyTree, Policy, std::shared_ptr<PolicyTree>>(m, "PolicyTree");

    m.def("threshold_policy", &threshold_policy, py::arg("model"), py::arg("tau") = 0.0);
    m.def("outcome_policy", &outcome_policy, py::arg("model"), py::arg("tau"));
    m.def("fixed_policy", &fixed_policy, py::arg("level"));

    py::enum_<OutcomeKind>(m, "OutcomeKind")
        .value("continuous", OutcomeKind::continuous)
        .value("bernoulli", OutcomeKind::bernoulli);
    py::enum_<ConfoundingDirection>(m, "ConfoundingDirection")
        .value("opposing", ConfoundingDirection::opposing)
        .value("reinforcing", ConfoundingDirection::reinforcing);

    py::class_<DgpConfig>(m, "DgpConfig")
        .def(py::init<>())
        .def_readwrite("n_samples", &DgpConfig::n_samples)
        .def_readwrite("n_features", &DgpConfig::n_features)
        .def_readwrite("baseline_coefs", &DgpConfig::baseline_coefs)
        .def_readwrite("effect_coefs", &DgpConfig::effect_coefs)
        .def_readwrite("baseline_intercept", &DgpConfig::baseline_intercept)
        .def_readwrite("effect_intercept", &DgpConfig::effect_intercept)
        .def_readwrite("outcome_noise_sd", &DgpConfig::outcome_noise_sd)
        .def_readwrite("outcome_kind", &DgpConfig::outcome_kind)
        .def_readwrite("propensity", &DgpConfig::propensity)
        .def_readwrite("confounding_strength", &DgpConfig::confounding_strength)
        .def_readwrite("confounding_direction", &DgpConfig::confounding_direction)
        .def_readwrite("hide_propensity", &DgpConfig::hide_propensity)
        .def_readwrite("seed", &DgpConfig::seed);

    m.def("gen_rct", &gen_rct);
    m.def("gen_confounded", &gen_confounded);
    m.def("gen_criteo_like", &gen_criteo_like, py::arg("n_samples"), py::arg("treat_rate"),
          py::arg("outcome_snr"), py::arg("effect_snr"), py::arg("effect_outcome_corr"),
          py::arg("seed"));
    m.def("oracle_policy_value", &oracle_policy_value);
    m.def("with_constant_propensity", &with_constant_propensity);

    py::class_<TreeParams>(m, "TreeParams")
        .def(py::init<>())
        .def_readwrite("max_depth", &TreeParams::max_depth)
        .def_readwrite("min_leaf", &TreeParams::min_leaf)
        .def_readwrite("min_split_gain", &TreeParams::min_split_gain)
        .def_readwrite("honest", &TreeParams::honest)
        .def_readwrite("seed", &TreeParams::seed);

    m.def("fit_outcome_tree", &fit_outcome_tree, py::arg("train"),
          py::arg("arm_filter") = std::nullopt, py::arg("params") = TreeParams{});
    m.def("fit_causal_tree", &fit_causal_tree, py::arg("train"),
          py::arg("params") = TreeParams{});
    m.def("fit_two_model", &fit_two_model, py::arg("train"), py::arg("params") = TreeParams{});
    m.def("predict_effect_batch",
          [](const EffectModel& model, const Dataset& d) { return predict_batch(model, d); });
    m.def("predict_outcome_batch",
          [](const OutcomeModel& model, const Dataset& d) { return predict_batch(model, d); });

    m.def("to_weighted_classification", &to_weighted_classification);
    m.def("fit_policy_tree",
          [](const Dataset& dataset, const TreeParams& params) {
              return fit_policy_tree(to_weighted_classification(dataset), params);
          },
          py::arg("train"), py::arg("params") = TreeParams{});

    py::class_<EvaluationReport>(m, "EvaluationReport")
        .def_readonly("metric", &EvaluationReport::metric)
        .def_readonly("value", &EvaluationReport::value)
        .def_readonly("std_error", &EvaluationReport::std_error)
        .def_readonly("n", &EvaluationReport::n)
        .def_readonly("metadata", &EvaluationReport::metadata);
    py::class_<UpliftCurve>(m, "UpliftCurve")
        .def_readonly("points", &UpliftCurve::points)
        .def_readonly("metadata", &UpliftCurve::metadata);

    m.def("transformed_outcome", &transformed_outcome);
    m.def("effect_mse", &effect_mse);
    m.def("oracle_regret", &oracle_regret);
    m.def("ips_policy_value", &ips_policy_value);
    m.def("uplift_curve", &uplift_curve, py::arg("scores"), py::arg("test"),
          py::arg("n_grid") = 20);
    m.def("auuc", &auuc);
    m.def("decision_error_rate", &decision_error_rate);

    m.def("load_csv",
          [](const std::string& path) {
              std::ifstream in(path);
              if (!in) throw IoError("'" + path + "': cannot open");
              std::string header_line;
              std::getline(in, header_line);
              std::vector<std::string> header;
              std::size_t start = 0;
              while (true) {
                  const std::size_t pos = header_line.find(',', start);
                  if (pos == std::string::npos) {
                      header.push_back(header_line.substr(start));
                      break;
                  }
                  header.push_back(header_line.substr(start, pos - start));
                  start = pos + 1;
              }
              return load_csv(path, CsvSchema::auto_detect(header));
          },
          py::arg("path"))
        ;
    m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"),
          py::arg("include_oracle") = false);

    m.def("analytic_wrong_prob", &analytic_wrong_prob);
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("name", &ScenarioConfig::name)
        .def_readwrite("true_effect", &ScenarioConfig::true_effect)
        .def_readwrite("threshold", &ScenarioConfig::threshold)
        .def_readwrite("bm_mean", &ScenarioConfig::bm_mean)
        .def_readwrite("bm_sd", &ScenarioConfig::bm_sd)
        .def_readwrite("um_mean", &ScenarioConfig::um_mean)
        .def_readwrite("um_sd", &ScenarioConfig::um_sd)
        .def_readwrite("n_draws", &ScenarioConfig::n_draws)
        .def_readwrite("seed", &ScenarioConfig::seed);
    py::class_<ScenarioResult>(m, "ScenarioResult")
        .def_readonly("name", &ScenarioResult::name)
        .def_readonly("bm_wrong_rate", &ScenarioResult::bm_wrong_rate)
        .def_readonly("um_wrong_rate", &ScenarioResult::um_wrong_rate)
        .def_readonly("bm_wrong_analytic", &ScenarioResult::bm_wrong_analytic)
        .def_readonly("um_wrong_analytic", &ScenarioResult::um_wrong_analytic)
        .def_readonly("correct_action", &ScenarioResult::correct_action);
    m.def("run_scenario", &run_scenario);
    m.def("default_scenarios", &default_scenarios, py::arg("n_draws") = 100000,
          py::arg("seed") = 0);
}
