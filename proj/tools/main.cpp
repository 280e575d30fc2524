#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) {
  return hdflow::cli::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
