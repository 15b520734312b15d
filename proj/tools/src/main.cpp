#include <iostream>
#include <string>
#include <vector>

#include "nam/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nam::run_cli(args, std::cout, std::cerr);
}
