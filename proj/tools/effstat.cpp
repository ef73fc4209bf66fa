#include <iostream>

#include "effstat/cli.hpp"

int main(int argc, char** argv) { return effstat::cli::run(argc, argv, std::cout, std::cerr); }
