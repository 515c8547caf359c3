#include <iostream>

#include "netform/cli.hpp"

int main(int argc, char** argv) { return netform::run_cli(argc, argv, std::cout, std::cerr); }
