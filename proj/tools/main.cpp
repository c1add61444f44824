#include <iostream>
#include <vector>

#include "cahiers/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return cahiers::dispatch(args, std::cout, std::cerr);
}
