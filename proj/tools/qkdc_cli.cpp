#include "qkdc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qkdc::cli::run(argc, argv, std::cout, std::cerr); }
