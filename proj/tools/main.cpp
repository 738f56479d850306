#include <iostream>

#include "regrow/cli.hpp"

int main(int argc, char** argv) { return regrow::run_cli(argc, argv, std::cout, std::cerr); }
