#include <iostream>

#include "kreisslab_cli/cli.hpp"

int main(int argc, char** argv) {
    return kreisslab::cli::run(argc, argv, std::cout, std::cerr);
}
