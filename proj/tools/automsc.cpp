#include <iostream>

#include "automsc/cli.hpp"

int main(int argc, char** argv) { return automsc::cli::run(argc, argv, std::cout, std::cerr); }
