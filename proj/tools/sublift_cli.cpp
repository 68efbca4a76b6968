#include <iostream>

#include "sublift/cli.hpp"

int main(int argc, char** argv) { return sublift::cli_main(argc, argv, std::cout, std::cerr); }
