#include <iostream>
#include <string>
#include <vector>

#include "mbrlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mbrlab::run_cli(args, std::cout, std::cerr);
}
