#include <iostream>

#include "okml/cli.hpp"

int main(int argc, char** argv) {
  return okml::cli_main(argc, argv, std::cout, std::cerr);
}
