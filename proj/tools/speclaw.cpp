#include <iostream>

#include "speclaw/cli.hpp"

int main(int argc, char** argv) { return speclaw::run_cli(argc, argv, std::cout, std::cerr); }
