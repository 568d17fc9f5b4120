#include <iostream>

#include "korpusmap/cli.hpp"

int main(int argc, char** argv) { return korpusmap::cli::run(argc, argv, std::cout, std::cerr); }
