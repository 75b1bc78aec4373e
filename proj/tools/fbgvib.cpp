#include <iostream>

#include "fbgvib/cli.hpp"

int main(int argc, char** argv) { return fbgvib::run_cli(argc, argv, std::cout, std::cerr); }
