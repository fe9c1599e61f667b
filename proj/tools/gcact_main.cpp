#include <iostream>

#include "gcact/cli.hpp"

int main(int argc, char** argv) { return gcact::cli::run(argc, argv, std::cout, std::cerr); }
