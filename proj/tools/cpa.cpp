#include <iostream>

#include "cpa/cli.hpp"

int main(int argc, char** argv) { return cpa::run_cli(argc, argv, std::cout, std::cerr); }
