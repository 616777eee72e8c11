#include <iostream>

#include "cope/cli.hpp"

int main(int argc, char** argv) { return cope::cli::run(argc, argv, std::cout, std::cerr); }
