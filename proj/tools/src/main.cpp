#include <iostream>
#include <string>
#include <vector>

#include "sawlab/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sawlab::cli::run(args, std::cout, std::cerr);
}
