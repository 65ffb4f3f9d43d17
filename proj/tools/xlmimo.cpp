#include "xlmimo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return xlmimo::run_cli(argc, argv, std::cout, std::cerr);
}
