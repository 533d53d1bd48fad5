#include <iostream>
#include <string>
#include <vector>

#include "triage/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return triage::cli::run(args, std::cout, std::cerr);
}
