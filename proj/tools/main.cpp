#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  return kamsep::run(argc, argv, std::cout, std::cerr);
}
