#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

std::string cdm_bin() {
    const char* bin = std::getenv("CDM_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "CDM_BIN must point at the cdm executable");
    return bin;
}

RunResult run_cdm(const std::string& args) {
    const std::string cmd = cdm_bin() + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.stdout_text.append(buf, got);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cdm_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    std::string write_json(const std::string& name, const json& doc) const {
        const auto p = file(name);
        std::ofstream out(p);
        out << doc.dump(2);
        return p;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

json gen_config(const std::string& output, std::uint64_t seed = 1) {
    return json{{"kind", "rct"},
                {"output", output},
                {"include_oracle", true},
                {"dgp",
                 {{"n_samples", 600},
                  {"n_features", 2},
                  {"baseline_coefs", {1.0, 0.0}},
                  {"effect_coefs", {0.0, 1.5}},
                  {"outcome_noise_sd", 0.3},
                  {"seed", seed}}}};
}

}  // namespace

TEST_CASE("gen writes a csv and a summary, deterministically") {
    TempDir tmp;
    const auto csv = tmp.file("data.csv");
    const auto cfg = tmp.write_json("gen.json", gen_config(csv));
    const auto r = run_cdm("gen --config " + cfg);
    REQUIRE(r.exit_code == 0);
    const json summary = json::parse(r.stdout_text);
    CHECK(summary.at("n") == 600);
    CHECK(summary.contains("oracle_ate"));
    const std::string first = read_file(csv);
    CHECK(first.rfind("f0,f1,treatment,outcome,propensity,y0,y1,true_cate\n", 0) == 0);

    // Re-running with the identical config is byte-identical.
    const auto r2 = run_cdm("gen --config " + cfg);
    REQUIRE(r2.exit_code == 0);
    CHECK(r2.stdout_text == r.stdout_text);
    CHECK(read_file(csv) == first);
}

TEST_CASE("train then eval round trip") {
    TempDir tmp;
    const auto train_csv = tmp.file("train.csv");
    const auto test_csv = tmp.file("test.csv");
    REQUIRE(run_cdm("gen --config " + tmp.write_json("g1.json", gen_config(train_csv, 1)))
                .exit_code == 0);
    REQUIRE(run_cdm("gen --config " + tmp.write_json("g2.json", gen_config(test_csv, 2)))
                .exit_code == 0);

    const auto model_path = tmp.file("model.json");
    const auto train_cfg = tmp.write_json(
        "train.json", json{{"input", train_csv},
                           {"method", "causal-tree"},
                           {"params", {{"max_depth", 2}, {"min_leaf", 10}}},
                           {"model_output", model_path}});
    const auto tr = run_cdm("train --config " + train_cfg);
    REQUIRE(tr.exit_code == 0);
    const json tsummary = json::parse(tr.stdout_text);
    CHECK(tsummary.at("method") == "causal-tree");
    CHECK(tsummary.at("n_train") == 600);
    CHECK(json::parse(read_file(model_path)).at("format_version") == "cdm-model-1");

    const auto eval_cfg = tmp.write_json(
        "eval.json",
        json{{"model", model_path},
             {"test", test_csv},
             {"metrics", {"effect-mse", "oracle-regret", "ips-value", "decision-error", "auuc"}}});
    const auto ev = run_cdm("eval --config " + eval_cfg);
    REQUIRE(ev.exit_code == 0);
    const json reports = json::parse(ev.stdout_text).at("reports");
    REQUIRE(reports.size() == 5);
    CHECK(reports[0].at("metric") == "effect_mse");
    CHECK(reports[0].at("metadata").at("comparative_only") == "true");
    CHECK(reports[1].at("metric") == "oracle_regret");
    CHECK(reports[1].at("value").get<double>() >= 0.0);

    // Determinism across re-runs.
    CHECK(run_cdm("eval --config " + eval_cfg).stdout_text == ev.stdout_text);
}

TEST_CASE("eval writes an uplift curve csv") {
    TempDir tmp;
    const auto csv = tmp.file("d.csv");
    REQUIRE(run_cdm("gen --config " + tmp.write_json("g.json", gen_config(csv, 5))).exit_code ==
            0);
    const auto model_path = tmp.file("m.json");
    REQUIRE(run_cdm("train --config " +
                    tmp.write_json("t.json", json{{"input", csv},
                                                  {"method", "two-model"},
                                                  {"params", {{"max_depth", 2}}},
                                                  {"model_output", model_path}}))
                .exit_code == 0);
    const auto curve_path = tmp.file("curve.csv");
    const auto ev = run_cdm("eval --config " +
                            tmp.write_json("e.json", json{{"model", model_path},
                                                          {"test", csv},
                                                          {"metrics", {"uplift-curve"}},
                                                          {"n_grid", 10},
                                                          {"curve_output", curve_path}}));
    REQUIRE(ev.exit_code == 0);
    const std::string curve = read_file(curve_path);
    CHECK(curve.rfind("fraction,incremental_outcome\n0,0\n", 0) == 0);
    // 10 grid points + the origin + header.
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 12);
}

TEST_CASE("policy-tree training refuses data without propensities (exit 4)") {
    TempDir tmp;
    const auto csv = tmp.file("noprop.csv");
    {
        std::ofstream out(csv);
        out << "f0,treatment,outcome\n";
        for (int i = 0; i < 40; ++i)
            out << (i % 7) * 0.1 << ',' << i % 2 << ',' << (i % 3) * 1.0 << '\n';
    }
    const auto cfg = tmp.write_json("t.json", json{{"input", csv},
                                                   {"method", "policy-tree"},
                                                   {"model_output", tmp.file("m.json")}});
    CHECK(run_cdm("train --config " + cfg).exit_code == 4);
}

TEST_CASE("exit codes: config errors are 2, I/O errors are 3") {
    TempDir tmp;
    // Unknown key.
    auto bad = gen_config(tmp.file("x.csv"));
    bad["surprise"] = 1;
    CHECK(run_cdm("gen --config " + tmp.write_json("bad.json", bad)).exit_code == 2);
    // Unknown kind.
    auto bad2 = gen_config(tmp.file("x.csv"));
    bad2["kind"] = "parquet";
    CHECK(run_cdm("gen --config " + tmp.write_json("bad2.json", bad2)).exit_code == 2);
    // Missing config file.
    CHECK(run_cdm("gen --config " + tmp.file("missing.json")).exit_code == 3);
    // Malformed JSON.
    {
        std::ofstream out(tmp.file("broken.json"));
        out << "{ not json";
    }
    CHECK(run_cdm("gen --config " + tmp.file("broken.json")).exit_code == 2);
    // Missing input CSV.
    const auto t = tmp.write_json("t.json", json{{"input", tmp.file("absent.csv")},
                                                 {"method", "causal-tree"},
                                                 {"model_output", tmp.file("m.json")}});
    CHECK(run_cdm("train --config " + t).exit_code == 3);
}

TEST_CASE("skip-bad-rows flag") {
    TempDir tmp;
    const auto csv = tmp.file("dirty.csv");
    {
        std::ofstream out(csv);
        out << "f0,treatment,outcome,propensity\n";
        for (int i = 0; i < 30; ++i)
            out << (i - 15) * 0.1 << ',' << i % 2 << ',' << (i % 2 ? 1.0 : 0.0) << ",0.5\n";
        out << "oops,1,1.0,0.5\n";
    }
    const auto cfg = tmp.write_json("t.json", json{{"input", csv},
                                                   {"method", "causal-tree"},
                                                   {"params", {{"max_depth", 1}}},
                                                   {"model_output", tmp.file("m.json")}});
    CHECK(run_cdm("train --config " + cfg).exit_code == 3);
    CHECK(run_cdm("train --skip-bad-rows --config " + cfg).exit_code == 0);
}

TEST_CASE("simulate with defaults emits three panels") {
    TempDir tmp;
    const auto cfg = tmp.write_json("s.json", json{{"defaults", true}, {"n_draws", 20000}});
    const auto r = run_cdm("simulate --config " + cfg);
    REQUIRE(r.exit_code == 0);
    const json results = json::parse(r.stdout_text).at("results");
    REQUIRE(results.size() == 3);
    for (const auto& panel : results) {
        CHECK(panel.contains("bm_wrong_rate"));
        CHECK(panel.contains("um_wrong_analytic"));
    }
    CHECK(run_cdm("simulate --config " + cfg).stdout_text == r.stdout_text);
}

TEST_CASE("simulate with explicit scenarios") {
    TempDir tmp;
    const auto cfg = tmp.write_json(
        "s.json",
        json{{"scenarios",
              {{{"name", "t"}, {"bm_mean", 0.5}, {"bm_sd", 0.35}, {"um_mean", 1.0},
                {"um_sd", 0.7}, {"n_draws", 10000}, {"seed", 4}}}}});
    const auto r = run_cdm("simulate --config " + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.stdout_text).at("results")[0].at("name") == "t");
}

TEST_CASE("experiment: confounding report and determinism") {
    TempDir tmp;
    const auto out1 = tmp.file("out1");
    const auto out2 = tmp.file("out2");
    const auto cfg = tmp.write_json(
        "e.json", json{{"kind", "confounding"},
                       {"dgp",
                        {{"n_samples", 0},
                         {"n_features", 2},
                         {"baseline_coefs", {1.0, 0.0}},
                         {"effect_coefs", {0.0, 1.0}},
                         {"outcome_noise_sd", 0.5},
                         {"confounding_strength", 2.0},
                         {"confounding_direction", "opposing"},
                         {"hide_propensity", true},
                         {"seed", 0}}},
                       {"n_confounded", 1500},
                       {"n_experimental", 1500},
                       {"n_test", 2000},
                       {"learner", {{"max_depth", 2}, {"min_leaf", 20}}},
                       {"n_reps", 2},
                       {"seed", 9}});
    const auto r1 = run_cdm("experiment --config " + cfg + " --out " + out1);
    REQUIRE(r1.exit_code == 0);
    const json report = json::parse(read_file(out1 + "/report.json"));
    CHECK(report.at("format_version") == "cdm-report-1");
    CHECK(report.at("config").at("kind") == "confounding");
    CHECK(report.at("confounded_regret").size() == 2);

    const auto r2 = run_cdm("experiment --config " + cfg + " --out " + out2);
    REQUIRE(r2.exit_code == 0);
    CHECK(read_file(out1 + "/report.json") == read_file(out2 + "/report.json"));
}

TEST_CASE("experiment: proxy writes per-method curve csvs") {
    TempDir tmp;
    const auto out = tmp.file("out");
    const auto cfg = tmp.write_json(
        "p.json", json{{"kind", "proxy"},
                       {"generator",
                        {{"treat_rate", 0.5}, {"outcome_snr", 2.0}, {"effect_snr", 0.5},
                         {"effect_outcome_corr", 0.8}, {"seed", 2}}},
                       {"train_sizes", {400}},
                       {"n_test", 2000},
                       {"learner", {{"max_depth", 2}, {"min_leaf", 20}}},
                       {"n_reps", 2},
                       {"n_grid", 5},
                       {"seed", 13}});
    const auto r = run_cdm("experiment --config " + cfg + " --out " + out);
    REQUIRE(r.exit_code == 0);
    for (const char* method : {"outcome", "causal", "policy"})
        for (int rep = 0; rep < 2; ++rep) {
            const auto p = out + "/curve_" + method + "_size400_rep" + std::to_string(rep) + ".csv";
            REQUIRE_MESSAGE(fs::exists(p), p);
            CHECK(read_file(p).rfind("fraction,incremental_outcome\n", 0) == 0);
        }
    const json report = json::parse(read_file(out + "/report.json"));
    REQUIRE(report.at("replications").size() == 2);
    CHECK(report.at("replications")[0].contains("auuc_outcome"));
}
