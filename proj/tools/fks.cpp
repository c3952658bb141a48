#include <iostream>

#include "fks/cli.hpp"

int main(int argc, char** argv) { return fks::cli_main(argc, argv, std::cout, std::cerr); }
