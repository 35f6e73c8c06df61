#include <iostream>

#include "abae/cli.hpp"

int main(int argc, char** argv) { return abae::cli::main(argc, argv, std::cout, std::cerr); }
