#include <iostream>
#include <string>
#include <vector>

#include "emodis/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return emodis::cli::dispatch(args, std::cout, std::cerr);
}
