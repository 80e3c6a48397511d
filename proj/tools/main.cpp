#include <iostream>

#include "uavtrack/cli.hpp"

int main(int argc, char** argv) { return uavtrack::cli::run(argc, argv, std::cout, std::cerr); }
