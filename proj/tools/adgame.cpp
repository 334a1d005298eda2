#include <iostream>

#include "adgame/cli/commands.hpp"

int main(int argc, char** argv) { return adgame::cli::run_cli(argc, argv, std::cerr); }
