// cdm: generate data, train targeting models, evaluate decision metrics,
// and run the scenario/confounding/proxy experiments from JSON configs.

#include <CLI11.hpp>

#include "cdm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"causal decision making toolkit"};
    app.require_subcommand(1);

    cdm::cli::Options options;
    const char* subcommands[] = {"gen", "train", "eval", "simulate", "experiment"};
    for (const char* name : subcommands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", options.config_path, "JSON config file")->required();
        sub->add_option("--out", options.out_dir, "output directory for reports and curves");
        sub->add_flag("--skip-bad-rows", options.skip_bad_rows,
                      "count and skip malformed CSV rows instead of failing fast");
    }

    CLI11_PARSE(app, argc, argv);
    return cdm::cli::run(app.get_subcommands().front()->get_name(), options);
}
