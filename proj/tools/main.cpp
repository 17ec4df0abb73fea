#include <iostream>

#include "cxls/cli.hpp"

int main(int argc, char** argv) { return cxls::cli::main(argc, argv, std::cout, std::cerr); }
