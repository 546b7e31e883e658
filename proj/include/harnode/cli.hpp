#pragma once

#include <string>
#include <vector>

namespace harnode::cli {

enum ExitCode : int {
    kOk = 0,
    kEnvironmentError = 2,
    kInputError = 3,
};

/// Full command line (without the program name):
/// serve | simulate | analyze | report, each writing a config_echo.json
/// into its output directory.
int run(const std::vector<std::string>& args);

/// Asks a running `serve` or real-time `simulate` to finish.
void request_stop();

}  // namespace harnode::cli
