#include <iostream>

#include "sparta/cli.hpp"

int main(int argc, char** argv) {
  return sparta::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
