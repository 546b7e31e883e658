#include <csignal>
#include <string>
#include <vector>

#include "harnode/cli.hpp"

namespace {

extern "C" void on_signal(int) { harnode::cli::request_stop(); }

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    return harnode::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
