#include <iostream>

#include "itosim/cli/commands.hpp"

int main(int argc, char** argv) { return itosim::cli::run(argc, argv, std::cout, std::cerr); }
