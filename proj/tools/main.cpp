#include <string>
#include <vector>

#include "halodet/cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return halodet::cli::run_cli(args);
}
