#include <iostream>

#include "semilb/cli/commands.hpp"

int main(int argc, char** argv) { return semilb::cli::run_cli(argc, argv, std::cout, std::cerr); }
