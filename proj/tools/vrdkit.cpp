#include <iostream>
#include <string>
#include <vector>

#include "vrdkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return vrdkit::cli::run(args, std::cout, std::cerr);
}
