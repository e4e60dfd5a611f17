#include <iostream>
#include <string>
#include <vector>

#include "spamlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return spamlab::run_cli(args, std::cout, std::cerr);
}
