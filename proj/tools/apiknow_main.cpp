#include "apiknow/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return apiknow::run_command(args, std::cout, std::cerr);
}
