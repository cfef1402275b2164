#include <iostream>
#include <string>
#include <vector>

#include "g2f/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return g2f::cli::run(args, std::cout, std::cerr);
}
