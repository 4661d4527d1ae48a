#include <iostream>

#include "wcga/cli.hpp"

int main(int argc, char** argv) { return wcga::cli::run(argc, argv, std::cout, std::cerr); }
