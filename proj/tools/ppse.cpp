#include <iostream>

#include "ppse/cli/cli.hpp"

int main(int argc, char** argv) { return ppse::cli::main(argc, argv, std::cout, std::cerr); }
