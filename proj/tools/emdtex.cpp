#include <iostream>
#include <string>
#include <vector>

#include "emdtex/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return emdtex::cli::run(args, std::cout, std::cerr);
}
