#include <iostream>
#include <string>
#include <vector>

#include "hsicreg/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return hsicreg::cli::run(args, std::cout, std::cerr);
}
