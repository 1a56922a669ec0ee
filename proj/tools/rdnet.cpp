#include <iostream>

#include "rdnet/cli.hpp"

int main(int argc, char** argv) {
  return rdnet::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
