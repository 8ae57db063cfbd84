#include "blendplan/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return blendplan::cli::run(argc, argv, std::cout, std::cerr);
}
