#include <iostream>

#include "crowdcount/cli.hpp"

int main(int argc, char** argv) {
  return crowdcount::run_cli(argc, argv, std::cout, std::cerr);
}
