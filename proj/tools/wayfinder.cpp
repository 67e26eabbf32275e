#include <iostream>

#include "wayfinder/cli.hpp"

int main(int argc, char** argv) { return wayfinder::cli_main(argc, argv, std::cout, std::cerr); }
