#include "poche/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return poche::cli::run(argc, argv, std::cout, std::cerr); }
