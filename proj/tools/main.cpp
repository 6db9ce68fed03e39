#include <iostream>

#include "fdwd/cli.hpp"

int main(int argc, char** argv) { return fdwd::cli::run(argc, argv, std::cout, std::cerr); }
