#include "moduli/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return moduli::cli::main_entry(argc, argv, std::cout, std::cerr); }
