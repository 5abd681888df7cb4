#include "cdm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "cdm/eval.hpp"
#include "cdm/ingest.hpp"
#include "cdm/reduction.hpp"
#include "cdm/sim.hpp"
#include "cdm/synth.hpp"
#include "cdm/trees.hpp"

namespace cdm::cli {

namespace {

using nlohmann::json;

constexpr const char* kReportVersion = "cdm-report-1";

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        json doc;
        in >> doc;
        if (!doc.is_object()) throw ConfigError("config '" + path + "': expected a JSON object");
        return doc;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

void require_keys(const json& obj, const std::string& ctx,
                  std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) throw ConfigError(ctx + ": unknown key '" + key + "'");
}

template <typename T>
T get_required(const json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(ctx + ": bad value for '" + key + "'");
    }
}

template <typename T>
T get_optional(const json& obj, const std::string& ctx, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(ctx + ": bad value for '" + key + "'");
    }
}

DgpConfig parse_dgp(const json& obj) {
    require_keys(obj, "dgp",
                 {"n_samples", "n_features", "baseline_coefs", "effect_coefs",
                  "baseline_intercept", "effect_intercept", "outcome_noise_sd", "outcome_kind",
                  "propensity", "confounding_strength", "confounding_direction", "hide_propensity",
                  "seed"});
    DgpConfig c;
    c.n_samples = get_required<std::size_t>(obj, "dgp", "n_samples");
    c.n_features = get_required<int>(obj, "dgp", "n_features");
    c.baseline_coefs = get_required<std::vector<double>>(obj, "dgp", "baseline_coefs");
    c.effect_coefs = get_required<std::vector<double>>(obj, "dgp", "effect_coefs");
    c.baseline_intercept = get_optional(obj, "dgp", "baseline_intercept", 0.0);
    c.effect_intercept = get_optional(obj, "dgp", "effect_intercept", 0.0);
    c.outcome_noise_sd = get_optional(obj, "dgp", "outcome_noise_sd", 0.0);
    const std::string kind = get_optional<std::string>(obj, "dgp", "outcome_kind", "continuous");
    if (kind == "continuous")
        c.outcome_kind = OutcomeKind::continuous;
    else if (kind == "bernoulli")
        c.outcome_kind = OutcomeKind::bernoulli;
    else
        throw ConfigError("dgp: outcome_kind must be 'continuous' or 'bernoulli'");
    c.propensity = get_optional(obj, "dgp", "propensity", 0.5);
    c.confounding_strength = get_optional(obj, "dgp", "confounding_strength", 0.0);
    const std::string dir =
        get_optional<std::string>(obj, "dgp", "confounding_direction", "opposing");
    if (dir == "opposing")
        c.confounding_direction = ConfoundingDirection::opposing;
    else if (dir == "reinforcing")
        c.confounding_direction = ConfoundingDirection::reinforcing;
    else
        throw ConfigError("dgp: confounding_direction must be 'opposing' or 'reinforcing'");
    c.hide_propensity = get_optional(obj, "dgp", "hide_propensity", false);
    c.seed = get_required<std::uint64_t>(obj, "dgp", "seed");
    return c;
}

CriteoLikeConfig parse_criteo(const json& obj, bool with_n) {
    require_keys(obj, "criteo",
                 {"n_samples", "treat_rate", "outcome_snr", "effect_snr", "effect_outcome_corr",
                  "seed"});
    CriteoLikeConfig c;
    if (with_n) c.n_samples = get_required<std::size_t>(obj, "criteo", "n_samples");
    c.treat_rate = get_optional(obj, "criteo", "treat_rate", 0.85);
    c.outcome_snr = get_optional(obj, "criteo", "outcome_snr", 2.0);
    c.effect_snr = get_optional(obj, "criteo", "effect_snr", 0.5);
    c.effect_outcome_corr = get_optional(obj, "criteo", "effect_outcome_corr", 0.8);
    c.seed = get_required<std::uint64_t>(obj, "criteo", "seed");
    return c;
}

TreeParams parse_params(const json& obj) {
    require_keys(obj, "params", {"max_depth", "min_leaf", "min_split_gain", "honest", "seed"});
    TreeParams p;
    p.max_depth = get_optional(obj, "params", "max_depth", 3);
    p.min_leaf = get_optional<std::size_t>(obj, "params", "min_leaf", 1);
    p.min_split_gain = get_optional(obj, "params", "min_split_gain", 0.0);
    p.honest = get_optional(obj, "params", "honest", false);
    p.seed = get_optional<std::uint64_t>(obj, "params", "seed", 0);
    p.validate();
    return p;
}

std::vector<std::string> read_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("'" + path + "': missing header row");
    std::vector<std::string> header;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            header.push_back(line.substr(start));
            break;
        }
        header.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!header.empty() && !header.back().empty() && header.back().back() == '\r')
        header.back().pop_back();
    return header;
}

CsvSchema parse_schema(const json& value, const std::string& csv_path) {
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "auto") return CsvSchema::auto_detect(read_header(csv_path));
        return parse_schema(load_config(s), csv_path);  // schema file
    }
    if (!value.is_object()) throw ConfigError("schema: expected an object, a file path, or 'auto'");
    require_keys(value, "schema",
                 {"feature_columns", "treatment_column", "outcome_column", "propensity_column",
                  "constant_propensity", "y0_column", "y1_column"});
    CsvSchema schema;
    schema.feature_columns =
        get_required<std::vector<std::string>>(value, "schema", "feature_columns");
    schema.treatment_column =
        get_optional<std::string>(value, "schema", "treatment_column", "treatment");
    schema.outcome_column = get_optional<std::string>(value, "schema", "outcome_column", "outcome");
    if (value.contains("propensity_column"))
        schema.propensity_column = get_required<std::string>(value, "schema", "propensity_column");
    if (value.contains("constant_propensity"))
        schema.constant_propensity = get_required<double>(value, "schema", "constant_propensity");
    if (value.contains("y0_column"))
        schema.y0_column = get_required<std::string>(value, "schema", "y0_column");
    if (value.contains("y1_column"))
        schema.y1_column = get_required<std::string>(value, "schema", "y1_column");
    schema.validate();
    return schema;
}

Dataset load_dataset(const json& config, const std::string& ctx, const char* path_key,
                     const Options& options) {
    const std::string path = get_required<std::string>(config, ctx, path_key);
    const CsvSchema schema =
        parse_schema(config.contains("schema") ? config.at("schema") : json("auto"), path);
    LoadOptions load_options;
    load_options.skip_bad_rows = options.skip_bad_rows;
    LoadReport report;
    Dataset dataset = load_csv(path, schema, load_options, &report);
    if (report.rows_skipped > 0)
        std::cerr << "[cdm] " << path << ": skipped " << report.rows_skipped << " bad rows\n";
    return dataset;
}

json report_to_json(const EvaluationReport& r) {
    json j;
    j["metric"] = r.metric;
    j["value"] = r.value;
    if (r.std_error) j["std_error"] = *r.std_error;
    j["n"] = r.n;
    j["metadata"] = r.metadata;
    return j;
}

void write_curve_csv(const UpliftCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "fraction,incremental_outcome\n";
    for (const auto& [q, v] : curve.points)
        out << format_double(q) << ',' << format_double(v) << '\n';
    if (!out) throw IoError("write failure on '" + path + "'");
}

void emit(const json& doc) { std::cout << doc.dump() << '\n'; }

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failure on '" + path + "'");
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---- gen ----

int gen_impl(const Options& options) {
    const json config = load_config(options.config_path);
    require_keys(config, "gen", {"kind", "output", "include_oracle", "dgp", "criteo"});
    const std::string kind = get_required<std::string>(config, "gen", "kind");
    const std::string output = get_required<std::string>(config, "gen", "output");
    const bool include_oracle = get_optional(config, "gen", "include_oracle", false);

    std::optional<Dataset> dataset;
    if (kind == "rct" || kind == "confounded") {
        if (!config.contains("dgp")) throw ConfigError("gen: missing 'dgp' block");
        const DgpConfig dgp = parse_dgp(config.at("dgp"));
        dataset = kind == "rct" ? gen_rct(dgp) : gen_confounded(dgp);
    } else if (kind == "criteo_like") {
        if (!config.contains("criteo")) throw ConfigError("gen: missing 'criteo' block");
        const CriteoLikeConfig c = parse_criteo(config.at("criteo"), /*with_n=*/true);
        dataset = gen_criteo_like(c.n_samples, c.treat_rate, c.outcome_snr, c.effect_snr,
                                  c.effect_outcome_corr, c.seed);
    } else {
        throw ConfigError("gen: kind must be 'rct', 'confounded', or 'criteo_like'");
    }

    write_csv(*dataset, output, include_oracle);

    double treated = 0.0;
    for (const Sample& s : dataset->samples()) treated += s.treatment;
    json summary;
    summary["n"] = dataset->size();
    summary["treated_fraction"] = treated / static_cast<double>(dataset->size());
    summary["output"] = output;
    if (dataset->is_synthetic()) {
        double ate = 0.0;
        for (const Sample& s : dataset->samples()) ate += *s.true_cate;
        summary["oracle_ate"] = ate / static_cast<double>(dataset->size());
    }
    emit(summary);
    return 0;
}

// ---- train ----

int train_impl(const Options& options) {
    const json config = load_config(options.config_path);
    require_keys(config, "train", {"input", "schema", "method", "arm", "params", "model_output"});
    const std::string method = get_required<std::string>(config, "train", "method");
    const std::string model_output = get_required<std::string>(config, "train", "model_output");
    const TreeParams params =
        config.contains("params") ? parse_params(config.at("params")) : TreeParams{};
    const Dataset train = load_dataset(config, "train", "input", options);

    json doc;
    int depth = 0;
    if (method == "outcome-tree") {
        std::optional<TreatmentLevel> arm;
        if (config.contains("arm")) arm = get_required<int>(config, "train", "arm");
        const auto model = fit_outcome_tree(train, arm, params);
        doc = model_to_json(*model);
        depth = model->root().depth();
    } else if (method == "causal-tree") {
        const auto model = fit_causal_tree(train, params);
        doc = model_to_json(*model);
        depth = model->root().depth();
    } else if (method == "two-model") {
        const auto model = fit_two_model(train, params);
        doc = model_to_json(*model);
        depth = std::max(model->arm0().root().depth(), model->arm1().root().depth());
    } else if (method == "policy-tree") {
        const auto model = fit_policy_tree(to_weighted_classification(train), params);
        doc = model_to_json(*model);
        depth = model->root().depth();
    } else {
        throw ConfigError(
            "train: method must be one of outcome-tree, causal-tree, two-model, policy-tree");
    }
    save_model(doc, model_output);

    json summary;
    summary["method"] = method;
    summary["depth"] = depth;
    summary["n_train"] = train.size();
    summary["model_output"] = model_output;
    emit(summary);
    return 0;
}

// ---- eval ----

std::vector<double> scores_for(const LoadedModel& model, const Dataset& test) {
    if (model.effect) return predict_batch(*model.effect, test);
    if (model.outcome) return predict_batch(*model.outcome, test);
    std::vector<double> scores;
    scores.reserve(test.size());
    for (const Sample& s : test.samples()) scores.push_back(model.policy->score(s.features));
    return scores;
}

PolicyPtr policy_for(const LoadedModel& model, double tau) {
    if (model.effect) return threshold_policy(model.effect, tau);
    if (model.outcome) return outcome_policy(model.outcome, tau);
    return model.policy;
}

int eval_impl(const Options& options) {
    const json config = load_config(options.config_path);
    require_keys(config, "eval",
                 {"model", "test", "schema", "metrics", "tau", "n_grid", "curve_output"});
    const LoadedModel model = load_model(get_required<std::string>(config, "eval", "model"));
    const Dataset test = load_dataset(config, "eval", "test", options);
    const auto metrics = get_required<std::vector<std::string>>(config, "eval", "metrics");
    const double tau = get_optional(config, "eval", "tau", 0.0);
    const int n_grid = get_optional(config, "eval", "n_grid", 20);

    json reports = json::array();
    for (const std::string& metric : metrics) {
        if (metric == "effect-mse") {
            if (!model.effect) throw PreconditionError("eval: effect-mse needs an effect model");
            reports.push_back(report_to_json(effect_mse(*model.effect, test)));
        } else if (metric == "oracle-regret") {
            reports.push_back(report_to_json(oracle_regret(*policy_for(model, tau), test)));
        } else if (metric == "ips-value") {
            reports.push_back(report_to_json(ips_policy_value(*policy_for(model, tau), test)));
        } else if (metric == "decision-error") {
            reports.push_back(report_to_json(decision_error_rate(*policy_for(model, tau), test)));
        } else if (metric == "uplift-curve" || metric == "auuc") {
            const UpliftCurve curve = uplift_curve(scores_for(model, test), test, n_grid);
            if (metric == "auuc") {
                EvaluationReport r;
                r.metric = "auuc";
                r.value = auuc(curve);
                r.n = test.size();
                reports.push_back(report_to_json(r));
            } else {
                const std::string curve_path = get_optional<std::string>(
                    config, "eval", "curve_output", options.out_dir + "/uplift_curve.csv");
                write_curve_csv(curve, curve_path);
                json j;
                j["metric"] = "uplift-curve";
                j["curve_output"] = curve_path;
                j["n"] = test.size();
                j["metadata"] = curve.metadata;
                reports.push_back(j);
            }
        } else {
            throw ConfigError("eval: unknown metric '" + metric + "'");
        }
    }
    json summary;
    summary["reports"] = reports;
    emit(summary);
    return 0;
}

// ---- simulate ----

json scenario_to_json(const ScenarioResult& r) {
    json j;
    j["name"] = r.name;
    j["bm_wrong_rate"] = r.bm_wrong_rate;
    j["um_wrong_rate"] = r.um_wrong_rate;
    j["bm_wrong_analytic"] = r.bm_wrong_analytic;
    j["um_wrong_analytic"] = r.um_wrong_analytic;
    j["correct_action"] = r.correct_action;
    return j;
}

int simulate_impl(const Options& options) {
    const json config = load_config(options.config_path);
    require_keys(config, "simulate", {"scenarios", "defaults", "n_draws", "seed"});

    std::vector<ScenarioConfig> scenarios;
    if (get_optional(config, "simulate", "defaults", false)) {
        scenarios = default_scenarios(get_optional<std::size_t>(config, "simulate", "n_draws", 100000),
                                      get_optional<std::uint64_t>(config, "simulate", "seed", 0));
    } else {
        if (!config.contains("scenarios")) throw ConfigError("simulate: missing 'scenarios'");
        for (const json& s : config.at("scenarios")) {
            require_keys(s, "scenario",
                         {"name", "true_effect", "threshold", "bm_mean", "bm_sd", "um_mean",
                          "um_sd", "n_draws", "seed"});
            ScenarioConfig c;
            c.name = get_optional<std::string>(s, "scenario", "name", "scenario");
            c.true_effect = get_optional(s, "scenario", "true_effect", 1.0);
            c.threshold = get_optional(s, "scenario", "threshold", 0.0);
            c.bm_mean = get_required<double>(s, "scenario", "bm_mean");
            c.bm_sd = get_required<double>(s, "scenario", "bm_sd");
            c.um_mean = get_required<double>(s, "scenario", "um_mean");
            c.um_sd = get_required<double>(s, "scenario", "um_sd");
            c.n_draws = get_optional<std::size_t>(s, "scenario", "n_draws", 100000);
            c.seed = get_optional<std::uint64_t>(s, "scenario", "seed", 0);
            scenarios.push_back(std::move(c));
        }
    }

    json results = json::array();
    for (const ScenarioConfig& c : scenarios) results.push_back(scenario_to_json(run_scenario(c)));
    json summary;
    summary["results"] = results;
    emit(summary);
    return 0;
}

// ---- experiment ----

int experiment_impl(const Options& options) {
    const json config = load_config(options.config_path);
    const std::string kind = get_required<std::string>(config, "experiment", "kind");
    std::filesystem::create_directories(options.out_dir);

    json report;
    report["format_version"] = kReportVersion;
    report["config"] = config;

    if (kind == "confounding") {
        require_keys(config, "experiment",
                     {"kind", "dgp", "n_confounded", "n_experimental", "n_test", "learner",
                      "n_reps", "tau", "seed"});
        ConfoundingExperimentConfig c;
        c.dgp = parse_dgp(config.at("dgp"));
        c.n_confounded = get_required<std::size_t>(config, "experiment", "n_confounded");
        c.n_experimental = get_required<std::size_t>(config, "experiment", "n_experimental");
        c.n_test = get_optional<std::size_t>(config, "experiment", "n_test", 20000);
        c.learner = config.contains("learner") ? parse_params(config.at("learner")) : TreeParams{};
        c.n_reps = get_required<int>(config, "experiment", "n_reps");
        c.tau = get_optional(config, "experiment", "tau", 0.0);
        c.seed = get_required<std::uint64_t>(config, "experiment", "seed");

        const ConfoundingExperimentResult result = run_confounding_experiment(c);
        report["confounded_regret"] = result.confounded_regret;
        report["experimental_regret"] = result.experimental_regret;
        report["confounded_win_rate"] = result.confounded_win_rate;
        report["mean_confounded_regret"] = mean_of(result.confounded_regret);
        report["mean_experimental_regret"] = mean_of(result.experimental_regret);
    } else if (kind == "proxy") {
        require_keys(config, "experiment",
                     {"kind", "generator", "input", "schema", "train_sizes", "n_test", "learner",
                      "n_reps", "n_grid", "seed"});
        ProxyExperimentConfig c;
        if (config.contains("input")) {
            c.data = load_dataset(config, "experiment", "input", options);
        } else {
            if (!config.contains("generator"))
                throw ConfigError("experiment: proxy needs 'generator' or 'input'");
            c.generator = parse_criteo(config.at("generator"), /*with_n=*/false);
        }
        c.train_sizes = get_required<std::vector<std::size_t>>(config, "experiment", "train_sizes");
        c.n_test = get_optional<std::size_t>(config, "experiment", "n_test", 20000);
        c.learner = config.contains("learner") ? parse_params(config.at("learner")) : TreeParams{};
        c.n_reps = get_required<int>(config, "experiment", "n_reps");
        c.n_grid = get_optional(config, "experiment", "n_grid", 20);
        c.seed = get_required<std::uint64_t>(config, "experiment", "seed");

        const ProxyExperimentResult result = run_proxy_experiment(c);
        json reps = json::array();
        for (const ProxyRepResult& r : result.reps) {
            const std::string tag =
                "size" + std::to_string(r.train_size) + "_rep" + std::to_string(r.rep);
            write_curve_csv(r.curve_outcome, options.out_dir + "/curve_outcome_" + tag + ".csv");
            write_curve_csv(r.curve_causal, options.out_dir + "/curve_causal_" + tag + ".csv");
            write_curve_csv(r.curve_policy, options.out_dir + "/curve_policy_" + tag + ".csv");
            json j;
            j["train_size"] = r.train_size;
            j["rep"] = r.rep;
            j["auuc_outcome"] = r.auuc_outcome;
            j["auuc_causal"] = r.auuc_causal;
            j["auuc_policy"] = r.auuc_policy;
            reps.push_back(j);
        }
        report["replications"] = reps;
    } else {
        throw ConfigError("experiment: kind must be 'confounding' or 'proxy'");
    }

    write_json_file(report, options.out_dir + "/report.json");
    emit(report);
    return 0;
}

}  // namespace

int cmd_gen(const Options& options) { return gen_impl(options); }
int cmd_train(const Options& options) { return train_impl(options); }
int cmd_eval(const Options& options) { return eval_impl(options); }
int cmd_simulate(const Options& options) { return simulate_impl(options); }
int cmd_experiment(const Options& options) { return experiment_impl(options); }

int run(const std::string& command, const Options& options) {
    try {
        if (command == "gen") return gen_impl(options);
        if (command == "train") return train_impl(options);
        if (command == "eval") return eval_impl(options);
        if (command == "simulate") return simulate_impl(options);
        if (command == "experiment") return experiment_impl(options);
        std::cerr << "[cdm] unknown command '" << command << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "[cdm] config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "[cdm] I/O error: " << e.what() << '\n';
        return 3;
    } catch (const PreconditionError& e) {
        std::cerr << "[cdm] precondition failed: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace cdm::cli
