#include <iostream>
#include <string>
#include <vector>

#include "nijtoep/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nijtoep::run_cli(args, std::cout, std::cerr);
}
