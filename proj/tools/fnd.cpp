#include <iostream>
#include <string>
#include <vector>

#include "fnd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return fnd::run_cli(args, std::cout, std::cerr);
}
