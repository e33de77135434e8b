#include "randhyp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return randhyp::cli::run(argc, argv, std::cout, std::cerr); }
