#include <iostream>

#include "lieharm/cli.hpp"

int main(int argc, char** argv) { return lieharm::cli::run(argc, argv, std::cout, std::cerr); }
