#include <iostream>

#include "psckit/cli.hpp"

int main(int argc, char** argv) { return psckit::run_cli(argc, argv, std::cout, std::cerr); }
