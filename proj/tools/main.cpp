#include <iostream>
#include <string>
#include <vector>

#include "caustix/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return caustix::cli::dispatch(args, std::cout, std::cerr);
}
