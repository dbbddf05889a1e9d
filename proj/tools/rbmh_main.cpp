#include <iostream>

#include "rbmh/cli.hpp"

int main(int argc, char** argv) { return rbmh::cli_main(argc, argv, std::cout, std::cerr); }
