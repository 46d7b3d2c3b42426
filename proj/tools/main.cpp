#include <iostream>

#include "csd/cli.hpp"

int main(int argc, char** argv) { return csd::dispatch(argc, argv, std::cout, std::cerr); }
