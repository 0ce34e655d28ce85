#include <iostream>

#include "turbsim/cli.hpp"

int main(int argc, char** argv) { return turbsim::cli::run(argc, argv, std::cout, std::cerr); }
