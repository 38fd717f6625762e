#include <iostream>
#include <string>
#include <vector>

#include "pcad/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pcad::run_cli(args, std::cout, std::cerr);
}
