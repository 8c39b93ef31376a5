#include <iostream>

#include "plap/cli.hpp"

int main(int argc, char** argv) {
    return plap::cli::run(argc, argv, std::cout, std::cerr);
}
