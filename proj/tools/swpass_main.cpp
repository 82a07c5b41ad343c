#include "swpass/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return swpass::run_cli(argc, argv, std::cout, std::cerr); }
