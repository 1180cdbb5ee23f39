#include <iostream>

#include "langsim/cli.hpp"

int main(int argc, char** argv) { return langsim::cli::run(argc, argv, std::cout, std::cerr); }
