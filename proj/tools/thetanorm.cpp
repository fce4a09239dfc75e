#include "thetanorm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return thetanorm::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
