#include <iostream>

#include "scriptauth/cli.hpp"

int main(int argc, char** argv) {
  return scriptauth::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
