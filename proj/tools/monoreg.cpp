#include <iostream>

#include "monoreg/commands.hpp"

int main(int argc, char** argv) { return monoreg::cli::run(argc, argv, std::cout, std::cerr); }
