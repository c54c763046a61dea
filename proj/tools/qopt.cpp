#include <iostream>

#include "qopt/cli.hpp"

int main(int argc, char** argv) { return qopt::cli::run_cli(argc, argv, std::cout, std::cerr); }
