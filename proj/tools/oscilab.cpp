#include <iostream>

#include "oscilab/cli.hpp"

int main(int argc, char** argv) { return oscilab::cli_main(argc, argv, std::cout, std::cerr); }
