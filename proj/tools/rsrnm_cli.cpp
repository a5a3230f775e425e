#include <iostream>

#include "rsrnm/harness.hpp"

int main(int argc, char** argv) {
  return rsrnm::harness::run_cli(argc, argv, std::cout, std::cerr);
}
