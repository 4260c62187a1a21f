#include <iostream>

#include "cits/cli.hpp"

int main(int argc, char** argv) { return cits::run_cli(argc, argv, std::cout, std::cerr); }
