#include <iostream>
#include <string>
#include <vector>

#include "catch919/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return catch919::run_cli(args, std::cout, std::cerr);
}
