#include <iostream>
#include <string>
#include <vector>

#include "modalgauge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return modalgauge::cli::run(args, std::cout, std::cerr);
}
