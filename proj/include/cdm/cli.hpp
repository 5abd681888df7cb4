#pragma once

#include <optional>
#include <string>

namespace cdm::cli {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    bool skip_bad_rows = false;
};

// One function per subcommand. Each reads a JSON config, writes artifacts,
// prints a JSON summary on stdout (logs go to stderr), and returns the
// process exit code: 0 ok, 2 config error, 3 I/O error, 4 precondition.
int cmd_gen(const Options& options);
int cmd_train(const Options& options);
int cmd_eval(const Options& options);
int cmd_simulate(const Options& options);
int cmd_experiment(const Options& options);

/// Dispatch by subcommand name with the shared exception -> exit-code mapping.
int run(const std::string& command, const Options& options);

}  // namespace cdm::cli
