#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return impulse::app::run(argc, argv, std::cout, std::cerr); }
