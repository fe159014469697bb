#include <iostream>
#include <string>
#include <vector>

#include "blindmc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return blindmc::cli::run(args, std::cout, std::cerr);
}
