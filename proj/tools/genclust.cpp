#include <iostream>
#include <string>
#include <vector>

#include "genclust/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return genclust::cli_main(args, std::cout, std::cerr);
}
