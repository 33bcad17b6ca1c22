#include <iostream>

#include "fusionutil/cli.hpp"

int main(int argc, char** argv) {
  return fusionutil::cli::run(argc, argv, std::cout, std::cerr);
}
