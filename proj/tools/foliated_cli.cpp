#include "foliated/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return foliated::run_cli(argc, argv, std::cout, std::cerr); }
