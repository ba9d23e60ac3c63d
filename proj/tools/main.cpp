#include "acps/cli.hpp"

#include <iostream>

int main(int argc, char **argv) {
  return acps::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
