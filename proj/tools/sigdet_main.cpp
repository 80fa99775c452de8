#include <iostream>
#include <string>
#include <vector>

#include "sigdet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sigdet::cli::run_command(args, std::cout, std::cerr);
}
