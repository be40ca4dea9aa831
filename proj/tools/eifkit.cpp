#include <iostream>

#include "eifkit/cli.hpp"

int main(int argc, char** argv) { return eifkit::run_cli(argc, argv, std::cout, std::cerr); }
