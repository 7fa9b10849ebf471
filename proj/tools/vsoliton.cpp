#include <iostream>

#include "vsoliton/cli/commands.hpp"

int main(int argc, char** argv) { return vsoliton::cli::run_cli(argc, argv, std::cout, std::cerr); }
