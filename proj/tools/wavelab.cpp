#include <iostream>

#include "wavelab/cli_io.hpp"

int main(int argc, char** argv) { return wavelab::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
