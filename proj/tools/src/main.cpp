#include <iostream>

#include "stochalign_cli/cli.hpp"

int main(int argc, char** argv) {
  return stochalign::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
