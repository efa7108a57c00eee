#include <iostream>

#include "inhomlp/cli.hpp"

int main(int argc, char **argv) { return inhomlp::execute_cli(argc, argv, std::cout, std::cerr); }
