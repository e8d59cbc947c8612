#include <iostream>

#include "aoc/cli.hpp"

int main(int argc, char** argv) { return aoc::cli_main(argc, argv, std::cout, std::cerr); }
