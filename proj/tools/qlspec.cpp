#include <iostream>

#include "qlspec/cli.hpp"

int main(int argc, char** argv) {
    return qlspec::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
